// Thin API client plus the resumable long-poll event stream.
//
// The stream keeps a cursor (`next`) per branch and filters anything below
// it, so a reconnect after a dropped poll can never duplicate a step even
// if the server window overlaps the last delivery.

import type { EventsResponse, SessionEvent, Snapshot, TaskBody } from './types.js'

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`)
  }
}

export class SessionApi {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init)
    if (!resp.ok) {
      let detail = resp.statusText
      try {
        const body = await resp.json()
        if (body && body.detail) detail = String(body.detail)
      } catch {
        // body was not JSON; keep the status text
      }
      throw new ApiError(resp.status, detail)
    }
    return (await resp.json()) as T
  }

  createSession(task: TaskBody, strategy = 'react', pausePolicy = 'manual') {
    return this.request<{ id: string; state: string }>('/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ task, strategy, pause_policy: pausePolicy }),
    })
  }

  snapshot(id: string) {
    return this.request<Snapshot>(`/sessions/${id}`)
  }

  events(id: string, from: number, branch?: number, wait = 0) {
    const params = new URLSearchParams({ from: String(from) })
    if (branch !== undefined) params.set('branch', String(branch))
    if (wait > 0) params.set('wait', String(wait))
    return this.request<EventsResponse>(`/sessions/${id}/events?${params}`)
  }

  pause(id: string) {
    return this.request<{ id: string; state: string }>(`/sessions/${id}/pause`, { method: 'POST' })
  }

  resume(id: string) {
    return this.request<{ id: string; state: string }>(`/sessions/${id}/resume`, { method: 'POST' })
  }

  edit(id: string, stepIndex: number, text: string) {
    return this.request<{ id: string; state: string; branch: number }>(`/sessions/${id}/edit`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ step_index: stepIndex, text }),
    })
  }
}

export interface StreamSink {
  onEvents(events: SessionEvent[]): void
  onState?(state: string): void
  onConnection?(connected: boolean): void
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms))

export class EventStream {
  next = 0
  private stopped = false

  constructor(
    private api: SessionApi,
    private sessionId: string,
    private branch: number | undefined,
    private sink: StreamSink,
    private waitSeconds = 2,
    private retryMs = 300,
    private idleMs = 50,
  ) {}

  stop(): void {
    this.stopped = true
  }

  /** One poll round; returns the reported session state or null on error. */
  async pump(): Promise<string | null> {
    try {
      const resp = await this.api.events(this.sessionId, this.next, this.branch, this.waitSeconds)
      this.sink.onConnection?.(true)
      const fresh = resp.events.filter((e) => e.index >= this.next)
      if (fresh.length > 0) this.sink.onEvents(fresh)
      this.next = Math.max(this.next, resp.next)
      this.sink.onState?.(resp.state)
      return resp.state
    } catch (err) {
      this.sink.onConnection?.(false)
      return null
    }
  }

  /** Poll until the session terminates or stop() is called.

  The server long-polls (`wait` seconds) so consecutive rounds are cheap;
  the idle gap below only guards against a server that answers instantly. */
  async run(): Promise<void> {
    while (!this.stopped) {
      const before = this.next
      const state = await this.pump()
      if (state === 'terminal' || this.stopped) return
      if (state === null) {
        await sleep(this.retryMs)
      } else if (this.next === before) {
        await sleep(this.idleMs)
      }
    }
  }
}
