// Canvas drawing for the utility band and the progress sparkline. Both
// redraw from the full server payload every time; nothing is kept or
// recomputed between frames.

import type { BandPayload } from "./api.js"

const EPS = 1e-7

/**
 * Reject a band payload that does not satisfy the envelope ordering
 * lower <= center <= upper at every breakpoint, or whose arrays
 * disagree in length. A violation means the data cannot be trusted,
 * so drawing it would mislead.
 */
export function validateBand(band: BandPayload): void {
    const n = band.breakpoints.length
    if (band.lower.length !== n || band.upper.length !== n
        || band.center.length !== n) {
        throw new Error("band arrays disagree in length")
    }
    for (let i = 0; i < n; i++) {
        const lo = band.lower[i]!
        const mid = band.center[i]!
        const hi = band.upper[i]!
        if (lo > mid + EPS || mid > hi + EPS) {
            throw new Error(
                `band ordering violated at breakpoint ${band.breakpoints[i]}`)
        }
    }
}

function xScale(band: BandPayload, width: number): (x: number) => number {
    const lo = band.breakpoints[0]!
    const hi = band.breakpoints[band.breakpoints.length - 1]!
    const span = hi - lo || 1
    return (x) => ((x - lo) / span) * (width - 20) + 10
}

function yScale(height: number): (u: number) => number {
    return (u) => height - 10 - u * (height - 20)
}

export function drawBand(canvas: HTMLCanvasElement, band: BandPayload): void {
    validateBand(band)
    const ctx = canvas.getContext("2d")
    if (!ctx) return
    const { width, height } = canvas
    const sx = xScale(band, width)
    const sy = yScale(height)
    ctx.clearRect(0, 0, width, height)

    ctx.fillStyle = "rgba(66, 133, 244, 0.18)"
    ctx.beginPath()
    band.breakpoints.forEach((x, i) => {
        const px = sx(x)
        const py = sy(band.upper[i]!)
        if (i === 0) ctx.moveTo(px, py)
        else ctx.lineTo(px, py)
    })
    for (let i = band.breakpoints.length - 1; i >= 0; i--) {
        ctx.lineTo(sx(band.breakpoints[i]!), sy(band.lower[i]!))
    }
    ctx.closePath()
    ctx.fill()

    ctx.strokeStyle = "#1a56b0"
    ctx.lineWidth = 2
    ctx.beginPath()
    band.breakpoints.forEach((x, i) => {
        const px = sx(x)
        const py = sy(band.center[i]!)
        if (i === 0) ctx.moveTo(px, py)
        else ctx.lineTo(px, py)
    })
    ctx.stroke()

    ctx.fillStyle = "#1a56b0"
    band.breakpoints.forEach((x, i) => {
        ctx.beginPath()
        ctx.arc(sx(x), sy(band.center[i]!), 2.5, 0, 2 * Math.PI)
        ctx.fill()
    })
}

/** Polyline of a metric series, scaled to its own min and max. */
export function drawSparkline(canvas: HTMLCanvasElement, values: number[]): void {
    const ctx = canvas.getContext("2d")
    if (!ctx) return
    const { width, height } = canvas
    ctx.clearRect(0, 0, width, height)
    if (values.length === 0) return
    const lo = Math.min(...values)
    const hi = Math.max(...values)
    const span = hi - lo || 1
    ctx.strokeStyle = "#2b8a3e"
    ctx.lineWidth = 1.5
    ctx.beginPath()
    values.forEach((v, i) => {
        const x = (i / Math.max(1, values.length - 1)) * (width - 8) + 4
        const y = height - 4 - ((v - lo) / span) * (height - 8)
        if (i === 0) ctx.moveTo(x, y)
        else ctx.lineTo(x, y)
    })
    ctx.stroke()
}
