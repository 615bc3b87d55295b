// Session flow state machine. The state only ever changes when the
// service confirms something: a choice click flips the phase to
// "submitting" (disabling the buttons) and everything else waits for
// the response. A lost request is surfaced with a retry hook, and a
// retried answer that had in fact landed is recovered through the
// service's 409 by re-reading the session.

import {
    ApiError,
    createSession,
    getSession,
    postAnswer,
    postQuery,
    type PendingQuery,
    type SessionSummary,
} from "./api.js"

export type FlowPhase =
    | "idle"
    | "starting"
    | "fetching"
    | "question"
    | "submitting"
    | "answered"
    | "converged"
    | "error"

export interface FlowState {
    phase: FlowPhase
    summary: SessionSummary | null
    query: PendingQuery | null
    error: string | null
}

export interface StartOptions {
    range: [number, number]
    mode: "interactive" | "simulated"
    oracle?: string
}

export class SessionFlow {
    private base: string
    private onChange: (state: FlowState) => void
    private phase: FlowPhase = "idle"
    private summary: SessionSummary | null = null
    private query: PendingQuery | null = null
    private errorText: string | null = null
    private retryAction: (() => Promise<void>) | null = null

    constructor(base: string, onChange: (state: FlowState) => void) {
        this.base = base
        this.onChange = onChange
    }

    state(): FlowState {
        return {
            phase: this.phase,
            summary: this.summary,
            query: this.query,
            error: this.errorText,
        }
    }

    private emit(phase: FlowPhase): void {
        this.phase = phase
        if (phase !== "error") this.errorText = null
        this.onChange(this.state())
    }

    private fail(err: unknown, retry: () => Promise<void>): void {
        this.errorText = err instanceof Error ? err.message : String(err)
        this.retryAction = retry
        this.emit("error")
    }

    async retry(): Promise<void> {
        const action = this.retryAction
        if (action) await action()
    }

    async start(opts: StartOptions): Promise<void> {
        if (this.phase !== "idle" && this.phase !== "error") return
        this.emit("starting")
        try {
            const created = await createSession(this.base, {
                range: opts.range,
                mode: opts.mode,
                ...(opts.oracle ? { oracle: opts.oracle } : {}),
            })
            this.summary = await getSession(this.base, created.id)
        } catch (err) {
            this.fail(err, () => {
                this.phase = "idle"
                return this.start(opts)
            })
            return
        }
        await this.fetchQuery()
    }

    /** Ask the service for the next comparison. */
    async next(): Promise<void> {
        if (this.phase !== "answered") return
        await this.fetchQuery()
    }

    private async fetchQuery(): Promise<void> {
        const id = this.summary!.id
        this.emit("fetching")
        try {
            this.query = await postQuery(this.base, id)
        } catch (err) {
            if (err instanceof ApiError && err.code === "converged") {
                await this.refresh()
                return
            }
            this.fail(err, () => this.fetchQuery())
            return
        }
        this.emit("question")
    }

    /** Submit the clicked choice; ignored unless a question is showing. */
    async choose(choice: "A" | "B"): Promise<void> {
        if (this.phase !== "question") return
        const id = this.summary!.id
        this.emit("submitting")
        try {
            this.summary = await postAnswer(this.base, id, choice)
        } catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                await this.refresh()
                return
            }
            this.fail(err, () => {
                this.phase = "question"
                return this.choose(choice)
            })
            return
        }
        this.query = null
        this.emit("answered")
    }

    /** Re-read the session and land in whatever phase its state implies. */
    async refresh(): Promise<void> {
        const id = this.summary!.id
        try {
            this.summary = await getSession(this.base, id)
        } catch (err) {
            this.fail(err, () => this.refresh())
            return
        }
        if (this.summary.converged) {
            this.query = null
            this.emit("converged")
        } else if (this.summary.pending) {
            this.query = this.summary.pending
            this.emit("question")
        } else {
            this.query = null
            this.emit("answered")
        }
    }

    /** Latest server-confirmed session state, pretty-printed. */
    exportJson(): string {
        return JSON.stringify(this.summary, null, 2)
    }
}
