// Typed client for the elicitation service. Every number the page shows
// comes back from one of these calls; nothing is computed client side.

export interface LotteryOutcome {
    amount: number
    probability_pct: number
}

export interface PendingQuery {
    index: number
    a: { outcomes: LotteryOutcome[]; text: string }
    b: { amount: number; text: string }
}

export interface BandPayload {
    breakpoints: number[]
    lower: number[]
    upper: number[]
    center: number[]
}

export interface MetricRow {
    iteration: number
    n_points: number
    d_ac: number
    d_r1: number | null
    d_r2: number | null
    d_r2_ref: number | null
}

export interface SessionSummary {
    id: string
    mode: string
    grid: number[]
    n_queries: number
    pending: PendingQuery | null
    band: BandPayload
    metrics: MetricRow[]
    converged: boolean
}

export interface CreateSessionBody {
    range: [number, number]
    grid?: number[]
    config?: Record<string, unknown>
    mode?: string
    oracle?: string
}

export class ApiError extends Error {
    code: string
    status: number

    constructor(code: string, message: string, status: number) {
        super(message)
        this.code = code
        this.status = status
    }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await fetch(url, init)
    if (!res.ok) {
        let code = "unknown"
        let message = `HTTP ${res.status}`
        try {
            const body = await res.json()
            if (body && body.error) {
                code = body.error.code ?? code
                message = body.error.message ?? message
            } else if (body && body.detail) {
                code = "invalid"
                message = JSON.stringify(body.detail)
            }
        } catch {
            // non-JSON error body, keep the status line
        }
        throw new ApiError(code, message, res.status)
    }
    return (await res.json()) as T
}

function post(body?: unknown): RequestInit {
    return {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: body === undefined ? "{}" : JSON.stringify(body),
    }
}

export async function createSession(
    base: string, body: CreateSessionBody,
): Promise<{ id: string; grid: number[] }> {
    return request(`${base}/sessions`, post(body))
}

export async function getSession(base: string, id: string): Promise<SessionSummary> {
    return request(`${base}/sessions/${id}`)
}

export async function postQuery(base: string, id: string): Promise<PendingQuery> {
    return request(`${base}/sessions/${id}/query`, post())
}

export async function postAnswer(
    base: string, id: string, choice: "A" | "B",
): Promise<SessionSummary> {
    return request(`${base}/sessions/${id}/answer`, post({ choice }))
}

export async function getBand(base: string, id: string): Promise<BandPayload> {
    return request(`${base}/sessions/${id}/band`)
}
