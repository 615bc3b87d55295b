// Display helpers. The service stores amounts already rounded to the
// session's grid policy; these only control how the digits are printed.

/** Decimal places of the default grid policy the page creates sessions with. */
export const DISPLAY_DECIMALS = 2

/** Signed fixed-point amount, matching the service's own text rendering. */
export function fmtAmount(x: number, decimals: number = DISPLAY_DECIMALS): string {
    const sign = x < 0 ? "-" : "+"
    return sign + Math.abs(x).toFixed(decimals)
}

/** Percentage as delivered by the service. */
export function fmtPct(pct: number): string {
    return `${pct}%`
}
