/** Shared wire types for the authoring service. */

export interface Point {
  x: number;
  y: number;
}

/** One drawn arrow: velocity = (end - start) / framesSpan px/frame. */
export interface HintStroke {
  start: Point;
  end: Point;
  framesSpan: number;
}

export interface Hint {
  x: number;
  y: number;
  dx: number;
  dy: number;
}

export interface HintsDocument {
  mask: string;
  hints: Hint[];
  speed: number;
}

export type TrajectoryPreset = "still" | "zoom" | "sway" | "orbit";

export interface PresetCamera {
  preset: TrajectoryPreset;
  amplitude: number;
  phase: number;
}

export interface PreviewRequest {
  t: number;
  N: number;
  camera?: PresetCamera;
}

export interface MotionSummary {
  mean_magnitude: number;
  max_magnitude: number;
  iterations: number;
  motion_revision: number;
}

export interface JobStatus {
  done: boolean;
  frames: string[];
  error?: string;
}

export interface ServiceError {
  code: number;
  message: string;
}
