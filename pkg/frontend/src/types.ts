import { z } from 'zod';

/** Numeric cell as the core serializes it: finite number or null for NaN. */
const maybeNum = z.union([z.number(), z.null()]);

export const TestResultSchema = z.object({
  name: z.string(),
  statistic: maybeNum,
  p_raw: maybeNum,
  p_adjusted: maybeNum,
  reject: z.boolean(),
  scale: z.number().int(),
});

export const StatReportSchema = z.object({
  family: z.string(),
  alpha: z.number(),
  correction: z.string(),
  tests: z.array(TestResultSchema),
});

export const ProtocolSchema = z.object({
  condition: z.string(),
  flicker_hz: z.number(),
  n_stimuli: z.number().int(),
  stim_dur_s: z.number(),
  gap_dur_s: z.number(),
  n_baseline_epochs: z.number().int(),
  baseline_dur_s: z.number(),
  fs: z.number(),
  snr0: z.number(),
  habituation_decay: z.number(),
  noise_kind: z.string(),
  seed: z.number().int(),
});

export const ChannelBlockSchema = z.object({
  per_subject: z.array(z.array(z.array(maybeNum))),
  group_mean: z.array(z.array(maybeNum)),
  group_sd: z.array(z.array(maybeNum)),
  failures: z.record(z.string(), z.string()),
  reports: z.record(z.string(), StatReportSchema),
});

export const ExperimentResultSchema = z.object({
  schema: z.literal('msent-experiment/1'),
  method: z.string(),
  scales: z.array(z.number().int()),
  master_seed: z.number().int(),
  n_subjects: z.number().int(),
  channels: z.array(z.string()),
  conditions: z.record(
    z.string(),
    z.object({
      protocol: ProtocolSchema,
      channels: z.record(z.string(), ChannelBlockSchema),
    }),
  ),
  cross: z.record(z.string(), StatReportSchema),
});

export type TestResult = z.infer<typeof TestResultSchema>;
export type StatReport = z.infer<typeof StatReportSchema>;
export type ChannelBlock = z.infer<typeof ChannelBlockSchema>;
export type ExperimentResult = z.infer<typeof ExperimentResultSchema>;

export const METHODS = ['mife', 'mde', 'mae', 'mse', 'mfe', 'rmse', 'rmfe'] as const;
export type MethodName = (typeof METHODS)[number];

export interface KernelOptions {
  /** Embedding dimension (default 2). */
  m?: number;
  /** Tolerance as a fraction of the sample SD (default 0.15). */
  r?: number;
  /** Membership exponent for the fuzzy kernel (default 2). */
  n?: number;
}

export interface ProfileOptions extends KernelOptions {
  method?: MethodName;
  /** Scale factors, e.g. '1..20' or '1,2,5' (default '1..20'). */
  scales?: string;
  rMode?: 'per-scale' | 'fixed';
  /** Mode band LO,HI for the flagship method (1-based, fastest first). */
  band?: [number, number];
  samplingRate?: number;
}

export interface ExperimentSpec {
  subjects: number;
  seed: number;
  method?: MethodName;
  /** Condition labels to flicker frequencies, e.g. { CE: 15, OE: 20 }. */
  conditions?: Record<string, number>;
  channels?: string[];
  scales?: string;
  rMode?: 'per-scale' | 'fixed';
  band?: [number, number];
  snr0?: number;
  decay?: number;
  stimDur?: number;
  baselineDur?: number;
  nStimuli?: number;
  nBaselines?: number;
  samplingRate?: number;
  noise?: 'white' | 'pink';
  workers?: number;
}

export interface ProfilePoint {
  scale: number;
  value: number;
}
