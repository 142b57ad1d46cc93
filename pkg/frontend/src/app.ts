// Studio wiring: attach to a session, stream its steps, and drive the
// pause / edit-thought / resume flow with what-if branch comparison.
//
// UI rules enforced here (the server's 409 is the backstop, not the guard):
// editing is only offered while the session reports `paused`, and only on
// thought steps; cancelling the editor sends nothing.

import { renderBranchTree, renderComparison } from './branches.js'
import { EventStream, SessionApi } from './client.js'
import { renderEnvPanel } from './envpanel.js'
import { Timeline } from './timeline.js'
import type { SessionEvent, Snapshot } from './types.js'

export interface StudioElements {
  timeline: HTMLElement
  branches: HTMLElement
  envPanel: HTMLElement
  stateBadge: HTMLElement
  banner: HTMLElement
  pauseButton: HTMLButtonElement
  resumeButton: HTMLButtonElement
  editor: HTMLElement
  editorText: HTMLTextAreaElement
  editorSave: HTMLButtonElement
  editorCancel: HTMLButtonElement
  compare: HTMLElement
}

export function findElements(root: Document | HTMLElement): StudioElements {
  const get = <T extends HTMLElement>(id: string): T => {
    const el = (root instanceof Document ? root : root.ownerDocument!).getElementById(id)
    if (!el) throw new Error(`missing element #${id}`)
    return el as T
  }
  return {
    timeline: get('timeline'),
    branches: get('branches'),
    envPanel: get('env-panel'),
    stateBadge: get('state-badge'),
    banner: get('banner'),
    pauseButton: get<HTMLButtonElement>('pause-btn'),
    resumeButton: get<HTMLButtonElement>('resume-btn'),
    editor: get('editor'),
    editorText: get<HTMLTextAreaElement>('editor-text'),
    editorSave: get<HTMLButtonElement>('editor-save'),
    editorCancel: get<HTMLButtonElement>('editor-cancel'),
    compare: get('compare'),
  }
}

export class StudioApp {
  sessionId = ''
  state = 'unknown'
  snapshot: Snapshot | null = null
  viewedBranch: number | null = null
  /** Per-branch event caches; the view is a pure projection of these. */
  branchEvents = new Map<number, SessionEvent[]>()
  editTarget: SessionEvent | null = null
  private timeline: Timeline
  private stream: EventStream | null = null

  constructor(
    private api: SessionApi,
    private el: StudioElements,
    /** When false (tests), streams are prepared but not auto-polled. */
    private live = true,
  ) {
    this.timeline = new Timeline(el.timeline, (event) => this.openEditor(event))
    el.pauseButton.addEventListener('click', () => void this.pause())
    el.resumeButton.addEventListener('click', () => void this.resume())
    el.editorSave.addEventListener('click', () => void this.submitEdit())
    el.editorCancel.addEventListener('click', () => this.cancelEdit())
    this.closeEditor()
  }

  get editAllowed(): boolean {
    return this.state === 'paused'
  }

  async attach(sessionId: string): Promise<void> {
    this.sessionId = sessionId
    await this.refreshSnapshot()
  }

  detach(): void {
    this.stream?.stop()
    this.stream = null
  }

  async refreshSnapshot(): Promise<void> {
    this.snapshot = await this.api.snapshot(this.sessionId)
    this.setState(this.snapshot.state)
    renderBranchTree(this.el.branches, this.snapshot.branches, this.snapshot.active_branch, (b) =>
      void this.selectBranch(b),
    )
  }

  followActiveBranch(): void {
    const branch = this.snapshot?.active_branch ?? 0
    this.viewedBranch = branch
    this.timeline.clear()
    this.branchEvents.set(branch, [])
    this.stream?.stop()
    this.stream = new EventStream(this.api, this.sessionId, branch, {
      onEvents: (events) => this.onEvents(branch, events),
      onState: (state) => this.setState(state),
      onConnection: (connected) => this.setConnected(connected),
    })
    if (this.live) void this.stream.run()
  }

  /** One manual poll of the active stream (used when not live). */
  async pumpOnce(): Promise<string | null> {
    return this.stream ? this.stream.pump() : null
  }

  onEvents(branch: number, events: SessionEvent[]): void {
    const cache = this.branchEvents.get(branch) ?? []
    cache.push(...events)
    this.branchEvents.set(branch, cache)
    if (branch === this.viewedBranch) {
      this.timeline.append(events)
      const domain = this.snapshot?.task.domain ?? 'wiki-qa'
      renderEnvPanel(this.el.envPanel, domain, cache)
    }
  }

  setState(state: string): void {
    this.state = state
    this.el.stateBadge.textContent = state
    this.el.stateBadge.className = `state state-${state}`
    this.el.pauseButton.disabled = state !== 'running'
    this.el.resumeButton.disabled = state !== 'paused'
    if (!this.editAllowed) this.closeEditor()
  }

  setConnected(connected: boolean): void {
    this.el.banner.hidden = connected
    if (!connected) {
      this.el.banner.textContent = 'connection lost — retrying from the last received step'
    }
  }

  async pause(): Promise<void> {
    const resp = await this.api.pause(this.sessionId)
    this.setState(resp.state)
    await this.refreshSnapshot()
  }

  async resume(): Promise<void> {
    const resp = await this.api.resume(this.sessionId)
    this.setState(resp.state)
  }

  /** Open the inline editor for a thought row; no-op (with hint) otherwise. */
  openEditor(event: SessionEvent): void {
    if (!this.editAllowed || event.step.kind !== 'thought') {
      this.el.editor.dataset.hint =
        event.step.kind !== 'thought'
          ? 'only thoughts can be edited'
          : 'pause the session to edit thoughts'
      return
    }
    this.editTarget = event
    this.el.editorText.value = event.step.text ?? ''
    this.el.editor.hidden = false
  }

  closeEditor(): void {
    this.editTarget = null
    this.el.editor.hidden = true
    this.el.editorText.value = ''
  }

  cancelEdit(): void {
    // Deliberately requestless: abandoning an edit must not touch the server.
    this.closeEditor()
  }

  async submitEdit(): Promise<void> {
    if (!this.editTarget) return
    const target = this.editTarget
    await this.api.edit(this.sessionId, target.index, this.el.editorText.value)
    this.closeEditor()
    await this.api.resume(this.sessionId)
    await this.refreshSnapshot()
    this.followActiveBranch()
  }

  /** Show a (possibly frozen) branch; pulls its full stream once. */
  async selectBranch(branch: number): Promise<void> {
    this.viewedBranch = branch
    const resp = await this.api.events(this.sessionId, 0, branch)
    this.branchEvents.set(branch, resp.events)
    this.timeline.clear()
    this.timeline.append(resp.events)
    const snapshot = this.snapshot
    if (snapshot) {
      renderEnvPanel(this.el.envPanel, snapshot.task.domain, resp.events)
      const activeEvents = this.branchEvents.get(snapshot.active_branch)
      if (branch !== snapshot.active_branch && activeEvents) {
        renderComparison(this.el.compare, resp.events, activeEvents)
      }
    }
  }
}

export async function boot(doc: Document): Promise<StudioApp | null> {
  const api = new SessionApi('')
  const app = new StudioApp(api, findElements(doc))
  const params = new URLSearchParams(doc.defaultView?.location.search ?? '')
  const sessionId = params.get('session')
  if (sessionId) {
    await app.attach(sessionId)
    app.followActiveBranch()
  }
  return app
}
