// Renders one comparison as two clickable lottery cards.

import type { PendingQuery } from "./api.js"
import { fmtAmount, fmtPct } from "./format.js"

export interface QueryCardHandles {
    buttonA: HTMLButtonElement
    buttonB: HTMLButtonElement
}

function outcomeRow(amount: number, pct: number): HTMLDivElement {
    const row = document.createElement("div")
    row.className = "outcome"
    const amountEl = document.createElement("span")
    amountEl.className = "amount"
    amountEl.textContent = fmtAmount(amount)
    const pctEl = document.createElement("span")
    pctEl.className = "pct"
    pctEl.textContent = fmtPct(pct)
    row.append(amountEl, document.createTextNode(" with "), pctEl,
        document.createTextNode(" chance"))
    return row
}

/**
 * Build the card into `container` (replacing previous content) and hand
 * back the two choice buttons for the caller to wire up. The outcome
 * percentages are displayed exactly as the service sent them; the pair
 * always arrives summing to 100.
 */
export function renderQueryCard(
    container: HTMLElement, query: PendingQuery,
): QueryCardHandles {
    container.innerHTML = ""

    const heading = document.createElement("h2")
    heading.textContent = `Question ${query.index + 1}`
    container.appendChild(heading)

    const pair = document.createElement("div")
    pair.className = "choice-pair"

    const buttonA = document.createElement("button")
    buttonA.className = "choice choice-a"
    const titleA = document.createElement("h3")
    titleA.textContent = "Lottery A"
    buttonA.appendChild(titleA)
    for (const outcome of query.a.outcomes) {
        buttonA.appendChild(outcomeRow(outcome.amount, outcome.probability_pct))
    }

    const buttonB = document.createElement("button")
    buttonB.className = "choice choice-b"
    const titleB = document.createElement("h3")
    titleB.textContent = "Lottery B"
    buttonB.appendChild(titleB)
    const sure = document.createElement("div")
    sure.className = "outcome"
    const sureAmount = document.createElement("span")
    sureAmount.className = "amount"
    sureAmount.textContent = fmtAmount(query.b.amount)
    sure.append(sureAmount, document.createTextNode(" for sure"))
    buttonB.appendChild(sure)

    pair.append(buttonA, buttonB)
    container.appendChild(pair)
    return { buttonA, buttonB }
}
