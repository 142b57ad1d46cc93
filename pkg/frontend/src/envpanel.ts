// Environment summary panel: a few derived lines per domain, recomputed
// from the streamed steps (the client never invents state of its own).

import type { SessionEvent } from './types.js'

export function summarize(domain: string, events: SessionEvent[]): string[] {
  const steps = events.map((e) => e.step)
  const actions = steps.filter((s) => s.kind === 'action')
  const lines: string[] = []
  if (domain === 'household') {
    let location = '(middle of the room)'
    let holding = '(nothing)'
    for (const a of actions) {
      const args = a.args ?? []
      if (a.verb === 'go to' && args[0]) location = args[0]
      if (a.verb === 'take' && args[0]) holding = args[0]
      if (a.verb === 'put') holding = '(nothing)'
    }
    lines.push(`at: ${location}`, `holding: ${holding}`)
  } else if (domain === 'shop') {
    let page = 'home'
    let bought = ''
    for (const a of actions) {
      const arg = (a.args ?? [])[0] ?? ''
      if (a.verb === 'search') page = `results for "${arg}"`
      if (a.verb === 'click' && arg === 'Buy Now') bought = 'purchase placed'
      else if (a.verb === 'click' && /^B0|^SYN/.test(arg)) page = `product ${arg}`
    }
    lines.push(`page: ${page}`)
    if (bought) lines.push(bought)
  } else {
    // wiki domains
    let page = '(none)'
    let lookup = ''
    for (let i = 0; i < steps.length; i++) {
      const s = steps[i]
      if (s.kind !== 'action') continue
      const arg = (s.args ?? [])[0] ?? ''
      if (s.verb === 'search') {
        const obs = steps[i + 1]
        const missed = obs?.kind === 'observation' && (obs.text ?? '').startsWith('Could not find')
        page = missed ? '(none)' : arg
      }
      if (s.verb === 'lookup') lookup = arg
    }
    lines.push(`page: ${page}`)
    if (lookup) lines.push(`last lookup: ${lookup}`)
  }
  lines.push(`actions taken: ${actions.length}`)
  return lines
}

export function renderEnvPanel(root: HTMLElement, domain: string, events: SessionEvent[]): void {
  root.textContent = ''
  const doc = root.ownerDocument
  for (const line of summarize(domain, events)) {
    const div = doc.createElement('div')
    div.className = 'env-line'
    div.textContent = line
    root.appendChild(div)
  }
}
