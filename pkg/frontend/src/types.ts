// Payload shapes mirrored from the session service API (see repo README).

export type StepKind = 'thought' | 'action' | 'observation'

export interface StepPayload {
  kind: StepKind
  index: number
  text?: string
  verb?: string
  args?: string[]
}

export interface SessionEvent {
  branch: number
  index: number
  step: StepPayload
}

export interface EventsResponse {
  branch: number
  from: number
  next: number
  state: string
  events: SessionEvent[]
}

export interface BranchInfo {
  branch: number
  parent: number | null
  fork_step: number | null
  frozen: boolean
  steps: number
  status: { kind: string; detail: string }
}

export interface Snapshot {
  id: string
  state: string
  active_branch: number
  pause_policy: string
  task: { domain: string; instruction: string; gold?: string | null; step_limit: number }
  branches: BranchInfo[]
}

export interface TaskBody {
  domain: string
  instruction: string
  gold?: string | null
  step_limit?: number
}
