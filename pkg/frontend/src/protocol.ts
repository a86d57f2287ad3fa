// Wire types for the session host's HTTP + WebSocket protocol.
// One JSON document per WebSocket message; angles travel in degrees,
// positions in meters, times in seconds.

export interface ChainJointDesc {
  axis: number[];
  length_m: number;
  limit_deg: number[];
}

export interface ChainDesc {
  base: { position: number[]; orientation: number[] };
  effector_axis: number[];
  joints: ChainJointDesc[];
}

export interface KeyboardDesc {
  count: number;
  lowest_midi: number;
  names: string[];
  white: boolean[];
}

export interface SceneDesc {
  player_x: number;
  player_z: number;
  y_min: number;
  y_max: number;
}

export interface PhaseDesc {
  kind: string;
  page?: number;
  level?: number;
  part?: number;
  note?: number;
  cursor?: number;
}

export interface PromptDesc {
  id: string;
  ordinal: number;
}

export interface MetricsDesc {
  time_s: number;
  wrong_hot: number;
  wrong_cold: number;
  wrong_total: number;
}

export interface GameEventDesc {
  kind: string;
  [key: string]: unknown;
}

export interface Snapshot {
  type: "snapshot";
  tick: number;
  t: number;
  phase: PhaseDesc;
  prompt: PromptDesc;
  expression: string;
  angles_deg: number[] | null;
  highlight: number | null;
  metrics: MetricsDesc;
  done: boolean;
  chain: ChainDesc;
  keyboard: KeyboardDesc;
  scene: SceneDesc;
}

export interface Frame {
  type: "frame";
  tick: number;
  t: number;
  angles_deg: number[];
  expression: string;
  attention: { kind: string; index?: number };
  phase: PhaseDesc;
  prompt: PromptDesc;
  highlight: number | null;
  events: GameEventDesc[];
  last_event: string | null;
}

export interface EventRecord {
  type: "event";
  tick: number;
  t: number;
  event: GameEventDesc;
}

export type StreamMessage = Snapshot | Frame | EventRecord;

export type SessionInput =
  | { type: "key_press"; key: number }
  | { type: "face_position"; x: number; y: number; z: number }
  | { type: "face_lost" };

export interface SessionConfigBody {
  condition?: string;
  tick_rate_hz?: number;
  seed?: number;
}
