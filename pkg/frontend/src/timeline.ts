// Step timeline: one row per streamed event, thoughts visually distinct.
//
// All text is shown verbatim; rows longer than the clamp threshold collapse
// behind an explicit "show more" affordance instead of silently truncating.

import type { SessionEvent, StepPayload } from './types.js'

const CLAMP_CHARS = 280

export function stepText(step: StepPayload): string {
  if (step.kind === 'action') {
    const args = step.args ?? []
    return args.length > 0 ? `${step.verb}[${args.join(' / ')}]` : String(step.verb)
  }
  return step.text ?? ''
}

export function stepLabel(step: StepPayload): string {
  const name = step.kind.charAt(0).toUpperCase() + step.kind.slice(1)
  return `${name} ${step.index}`
}

export class Timeline {
  constructor(private root: HTMLElement, private onStepClick?: (event: SessionEvent) => void) {
    this.root.classList.add('timeline')
  }

  clear(): void {
    this.root.textContent = ''
  }

  count(): number {
    return this.root.querySelectorAll('.step').length
  }

  indexes(): number[] {
    return Array.from(this.root.querySelectorAll('.step')).map((el) =>
      Number((el as HTMLElement).dataset.index),
    )
  }

  append(events: SessionEvent[]): void {
    const doc = this.root.ownerDocument
    for (const event of events) {
      const row = doc.createElement('div')
      row.className = `step step-${event.step.kind}`
      row.dataset.index = String(event.index)
      row.dataset.branch = String(event.branch)

      const badge = doc.createElement('span')
      badge.className = 'badge'
      badge.textContent = stepLabel(event.step)
      row.appendChild(badge)

      const body = doc.createElement('span')
      body.className = 'step-text'
      const text = stepText(event.step)
      if (text.length > CLAMP_CHARS) {
        body.textContent = text.slice(0, CLAMP_CHARS)
        body.dataset.fullText = text
        const more = doc.createElement('button')
        more.className = 'show-more'
        more.textContent = '… show more'
        more.addEventListener('click', () => {
          body.textContent = text
          more.remove()
        })
        row.appendChild(body)
        row.appendChild(more)
      } else {
        body.textContent = text
        row.appendChild(body)
      }

      if (this.onStepClick) {
        row.addEventListener('click', () => this.onStepClick!(event))
      }
      this.root.appendChild(row)
    }
  }
}
