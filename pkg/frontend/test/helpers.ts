// A scripted in-memory stand-in for the session service, speaking the same
// HTTP contract through a fetch-compatible function.

import type { BranchInfo, SessionEvent, StepPayload } from '../src/types.js'

export function thought(index: number, text: string): StepPayload {
  return { kind: 'thought', index, text }
}

export function actionStep(index: number, verb: string, ...args: string[]): StepPayload {
  return { kind: 'action', index, verb, args }
}

export function obs(index: number, text: string): StepPayload {
  return { kind: 'observation', index, text }
}

export function asEvents(branch: number, steps: StepPayload[]): SessionEvent[] {
  return steps.map((step, index) => ({ branch, index, step }))
}

export class FakeService {
  state = 'running'
  activeBranch = 0
  branchEvents = new Map<number, SessionEvent[]>()
  branches: BranchInfo[] = []
  calls: string[] = []
  failNextEvents = 0
  nextBranchOnEdit: SessionEvent[] = []

  constructor(public sessionId = 'sess01') {
    this.setBranch(0, null, null, [])
  }

  setBranch(
    number: number,
    parent: number | null,
    forkStep: number | null,
    events: SessionEvent[],
    statusKind = 'running',
  ): void {
    this.branchEvents.set(number, events)
    const info: BranchInfo = {
      branch: number,
      parent,
      fork_step: forkStep,
      frozen: parent !== null ? false : false,
      steps: events.length,
      status: { kind: statusKind, detail: '' },
    }
    this.branches[number] = info
  }

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'content-type': 'application/json' },
    })
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET'
    this.calls.push(`${method} ${url}`)
    const u = new URL(url, 'http://studio.test')
    const path = u.pathname

    if (path === `/sessions/${this.sessionId}/events`) {
      if (this.failNextEvents > 0) {
        this.failNextEvents -= 1
        throw new TypeError('network down')
      }
      const from = Number(u.searchParams.get('from') ?? '0')
      const branch = Number(u.searchParams.get('branch') ?? this.activeBranch)
      const all = this.branchEvents.get(branch) ?? []
      const events = all.filter((e) => e.index >= from)
      return this.json({
        branch,
        from,
        next: from + events.length,
        state: this.state,
        events,
      })
    }
    if (path === `/sessions/${this.sessionId}` && method === 'GET') {
      return this.json({
        id: this.sessionId,
        state: this.state,
        active_branch: this.activeBranch,
        pause_policy: 'manual',
        task: { domain: 'household', instruction: 'put a clean knife in countertop.', step_limit: 8 },
        branches: this.branches,
      })
    }
    if (path === `/sessions/${this.sessionId}/pause`) {
      if (this.state === 'terminal') return this.json({ detail: 'terminal' }, 409)
      this.state = 'paused'
      return this.json({ id: this.sessionId, state: this.state })
    }
    if (path === `/sessions/${this.sessionId}/resume`) {
      if (this.state !== 'paused') return this.json({ detail: 'not paused' }, 409)
      this.state = 'running'
      return this.json({ id: this.sessionId, state: this.state })
    }
    if (path === `/sessions/${this.sessionId}/edit`) {
      if (this.state !== 'paused') return this.json({ detail: 'not paused' }, 409)
      const body = JSON.parse(String(init?.body ?? '{}'))
      const parent = this.activeBranch
      const number = this.branches.length
      this.setBranch(number, parent, body.step_index, this.nextBranchOnEdit)
      this.branches[parent].frozen = true
      this.activeBranch = number
      return this.json({ id: this.sessionId, state: this.state, branch: number })
    }
    return this.json({ detail: `no route for ${path}` }, 404)
  }
}

export function studioDom(): Document {
  document.body.innerHTML = `
    <span id="state-badge"></span>
    <button id="pause-btn"></button>
    <button id="resume-btn"></button>
    <div id="banner" hidden></div>
    <div id="branches"></div>
    <div id="env-panel"></div>
    <div id="timeline"></div>
    <div id="editor" hidden>
      <textarea id="editor-text"></textarea>
      <button id="editor-save"></button>
      <button id="editor-cancel"></button>
    </div>
    <div id="compare"></div>
  `
  return document
}
