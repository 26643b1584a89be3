/** JSON document shapes served by the recognition service API (v1). */

export interface Candidate {
  label: string;
  score: number;
  confidence: number;
}

export interface SampleSession {
  session_id: string;
  candidates: Candidate[];
}

export interface SessionStatus {
  session_id: string;
  state: "awaiting_label" | "labeled" | "merged";
  record_count: number;
  candidates: Candidate[];
}

export interface LabelResult {
  task_id: string;
  merged: boolean;
}

export type TaskState = "queued" | "running" | "done" | "failed";

export interface TrainMetrics {
  model_version: number;
  num_classes: number;
  labels: string[];
  accuracy?: number;
  confusion_matrix?: number[][];
}

export interface TrainTask {
  task_id: string;
  label: string;
  state: TaskState;
  started_at: number | null;
  finished_at: number | null;
  model_version: number | null;
  metrics: TrainMetrics | null;
  error: string | null;
}

export interface RoomEntry {
  label: string;
  class_index: number;
  sample_count: number;
}

export interface RoomList {
  rooms: RoomEntry[];
}

export interface ApiError {
  error: string;
  field?: string;
}
