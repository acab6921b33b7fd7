// Payload shapes returned by the sweepd API.

export type ServiceMode = 'read_write' | 'read_only';

export type RunStatus =
  | 'created'
  | 'submitted'
  | 'running'
  | 'finished'
  | 'failed'
  | 'cancelled';

export const RUN_STATUSES: RunStatus[] = [
  'created', 'submitted', 'running', 'finished', 'failed', 'cancelled',
];

export interface ServiceSpec {
  mode: ServiceMode;
  service: string;
  version: string;
}

export interface ParameterDefinition {
  name: string;
  kind: 'integer' | 'float' | 'string' | 'boolean';
  default: unknown;
  description: string;
  position: number;
}

export interface Simulator {
  id: string;
  name: string;
  command: string;
  parameter_definitions: ParameterDefinition[];
  input_mode: 'arguments' | 'json_file';
  description: string;
  created_at: string;
}

export interface ParameterSet {
  id: string;
  simulator_id: string;
  values: Record<string, unknown>;
  canonical_key: string;
  created_at: string;
  run_counts?: Record<RunStatus, number>;
}

export interface Run {
  id: string;
  parameter_set_id: string;
  seed: number;
  status: RunStatus;
  host_id: string;
  job_id: string | null;
  submitted_at: string | null;
  started_at: string | null;
  finished_at: string | null;
  elapsed_seconds: number | null;
  exit_code: number | null;
  simulator_version: string | null;
  result_dir: string | null;
  result_digest: string | null;
  error_notes: string[];
  created_at: string;
}

export interface Host {
  id: string;
  name: string;
  address: string;
  transport: string;
  max_concurrent_jobs: number;
}

export interface Analyzer {
  id: string;
  simulator_id: string;
  name: string;
  command: string;
  scope: 'on_run' | 'on_parameter_set';
  parameter_definitions: ParameterDefinition[];
}

export interface Analysis {
  id: string;
  analyzer_id: string;
  target_id: string;
  host_id: string;
  status: RunStatus;
  exit_code: number | null;
  result_dir: string | null;
  input_run_ids: string[];
  created_at: string;
}

export interface PlotPoint {
  parameter_set_id: string;
  x: number | string | boolean | null;
  y_mean: number | null;
  y_stderr: number | null;
  n: number;
  excluded: number;
  values: Record<string, unknown>;
}

export interface PlotData {
  x: string;
  y: string;
  anchor?: string;
  points: PlotPoint[];
}
