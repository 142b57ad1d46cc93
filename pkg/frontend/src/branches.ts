// Branch tree rendering and what-if comparison.

import { stepLabel, stepText } from './timeline.js'
import type { BranchInfo, SessionEvent } from './types.js'

export function renderBranchTree(
  root: HTMLElement,
  branches: BranchInfo[],
  active: number,
  onSelect: (branch: number) => void,
): void {
  root.textContent = ''
  const doc = root.ownerDocument
  const depth = (b: BranchInfo): number => {
    let d = 0
    let parent = b.parent
    while (parent !== null) {
      d += 1
      parent = branches[parent]?.parent ?? null
    }
    return d
  }
  for (const branch of branches) {
    const row = doc.createElement('div')
    row.className = 'branch-row' + (branch.branch === active ? ' active' : '')
    row.dataset.branch = String(branch.branch)
    row.style.paddingLeft = `${depth(branch) * 16}px`
    const fork =
      branch.fork_step !== null ? ` (fork of #${branch.parent} at step ${branch.fork_step})` : ''
    row.textContent = `#${branch.branch} ${branch.status.kind}${fork}${branch.frozen ? ' ❄' : ''}`
    row.addEventListener('click', () => onSelect(branch.branch))
    root.appendChild(row)
  }
}

/** Index of the first step where the two branches differ (or the shorter length). */
export function firstDivergence(a: SessionEvent[], b: SessionEvent[]): number {
  const n = Math.min(a.length, b.length)
  for (let i = 0; i < n; i++) {
    if (JSON.stringify(a[i].step) !== JSON.stringify(b[i].step)) return i
  }
  return n
}

export function renderComparison(
  root: HTMLElement,
  left: SessionEvent[],
  right: SessionEvent[],
): number {
  root.textContent = ''
  const doc = root.ownerDocument
  const split = firstDivergence(left, right)
  const columns = doc.createElement('div')
  columns.className = 'compare-columns'
  for (const [events, side] of [
    [left, 'left'],
    [right, 'right'],
  ] as const) {
    const col = doc.createElement('div')
    col.className = `compare-col compare-${side}`
    events.forEach((event, i) => {
      const row = doc.createElement('div')
      row.className = `step step-${event.step.kind}` + (i >= split ? ' diverged' : '')
      row.dataset.index = String(event.index)
      row.textContent = `${stepLabel(event.step)}: ${stepText(event.step)}`
      col.appendChild(row)
    })
    columns.appendChild(col)
  }
  root.appendChild(columns)
  return split
}
