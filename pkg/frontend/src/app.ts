// Page wiring. Finds the static skeleton, starts a session flow, and
// re-renders whole sections from each server response.

import type { FlowState } from "./flow.js"
import { SessionFlow } from "./flow.js"
import { renderQueryCard } from "./querycard.js"
import { drawBand, drawSparkline } from "./bandview.js"

export const DEFAULT_RANGE: [number, number] = [-0.5, 0.5]
export const DEMO_ORACLE = "exp10"

function byId<T extends HTMLElement>(doc: Document, id: string): T {
    const el = doc.getElementById(id)
    if (!el) throw new Error(`missing element #${id}`)
    return el as T
}

function show(el: HTMLElement, on: boolean): void {
    el.style.display = on ? "" : "none"
}

export function initApp(doc: Document, base: string): SessionFlow {
    const setup = byId<HTMLElement>(doc, "setup")
    const demoBox = byId<HTMLInputElement>(doc, "demo-mode")
    const startBtn = byId<HTMLButtonElement>(doc, "start")
    const workspace = byId<HTMLElement>(doc, "workspace")
    const meta = byId<HTMLElement>(doc, "session-meta")
    const queryContainer = byId<HTMLElement>(doc, "query-container")
    const nextBtn = byId<HTMLButtonElement>(doc, "next")
    const bandCanvas = byId<HTMLCanvasElement>(doc, "band-canvas")
    const sparkCanvas = byId<HTMLCanvasElement>(doc, "spark-canvas")
    const metricLine = byId<HTMLElement>(doc, "metric-line")
    const exportBtn = byId<HTMLButtonElement>(doc, "export")
    const banner = byId<HTMLElement>(doc, "error-banner")
    const errorMessage = byId<HTMLElement>(doc, "error-message")
    const retryBtn = byId<HTMLButtonElement>(doc, "retry")
    const status = byId<HTMLElement>(doc, "status")

    const flow = new SessionFlow(base, render)

    function render(state: FlowState): void {
        const { phase, summary, query } = state
        show(setup, phase === "idle" || (phase === "error" && !summary))
        show(workspace, summary !== null)
        show(banner, phase === "error")
        if (phase === "error") errorMessage.textContent = state.error ?? "request failed"

        if (summary) {
            meta.textContent = `session ${summary.id} (${summary.mode}), `
                + `${summary.n_queries} answered, `
                + `${summary.grid.length} breakpoints`
            drawBand(bandCanvas, summary.band)
            const series = summary.metrics.map((m) => m.d_ac)
            drawSparkline(sparkCanvas, series)
            const last = summary.metrics[summary.metrics.length - 1]
            metricLine.textContent = last
                ? `center movement ${last.d_ac.toFixed(4)} after `
                    + `${last.iteration} answers`
                : "no answers yet"
        }

        if (query && phase !== "answered") {
            const handles = renderQueryCard(queryContainer, query)
            const busy = phase === "submitting"
            handles.buttonA.disabled = busy
            handles.buttonB.disabled = busy
            handles.buttonA.addEventListener("click", () => { void flow.choose("A") })
            handles.buttonB.addEventListener("click", () => { void flow.choose("B") })
        } else if (phase === "answered" || phase === "converged") {
            queryContainer.innerHTML = ""
        }

        show(nextBtn, phase === "answered")
        exportBtn.disabled = summary === null

        switch (phase) {
            case "starting": status.textContent = "creating session..."; break
            case "fetching": status.textContent = "picking the next comparison..."; break
            case "question": status.textContent = "which would you rather have?"; break
            case "submitting": status.textContent = "recording your choice..."; break
            case "answered": status.textContent = "band updated"; break
            case "converged": status.textContent = "no informative comparisons remain"; break
            default: status.textContent = ""
        }
    }

    startBtn.addEventListener("click", () => {
        const demo = demoBox.checked
        void flow.start({
            range: DEFAULT_RANGE,
            mode: demo ? "simulated" : "interactive",
            ...(demo ? { oracle: DEMO_ORACLE } : {}),
        })
    })
    nextBtn.addEventListener("click", () => { void flow.next() })
    retryBtn.addEventListener("click", () => { void flow.retry() })
    exportBtn.addEventListener("click", () => {
        const text = flow.exportJson()
        const view = doc.defaultView
        if (!view || typeof view.URL.createObjectURL !== "function") return
        const blob = new Blob([text], { type: "application/json" })
        const url = view.URL.createObjectURL(blob)
        const a = doc.createElement("a")
        a.href = url
        const id = flow.state().summary?.id ?? "session"
        a.download = `session-${id}.json`
        a.click()
        view.URL.revokeObjectURL(url)
    })

    render(flow.state())
    return flow
}
