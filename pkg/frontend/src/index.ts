/**
 * Typed Node wrapper around the `msent` command line tool.
 *
 * Every number returned here is produced by the core process; this
 * module only moves data across the process boundary (temp CSV files in,
 * CSV/JSON results out) and never computes anything itself.
 */
import { execFileSync } from 'child_process';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import {
  ExperimentResult,
  ExperimentResultSchema,
  ExperimentSpec,
  KernelOptions,
  ProfileOptions,
  ProfilePoint,
} from './types';

export * from './types';

/** Error raised when the core reports a failure; `tag` is the core's
 *  machine-readable error identifier (e.g. "signal-too-short"). */
export class MsentError extends Error {
  readonly tag: string;
  readonly stage: string | null;
  readonly exitCode: number;

  constructor(message: string, tag: string, stage: string | null, exitCode: number) {
    super(message);
    this.name = 'MsentError';
    this.tag = tag;
    this.stage = stage;
    this.exitCode = exitCode;
  }
}

/** Path of the core executable; override with MSENT_BIN. */
export function coreBinary(): string {
  return process.env.MSENT_BIN || 'msent';
}

function runCore(args: string[]): string {
  try {
    return execFileSync(coreBinary(), args, { encoding: 'utf8' });
  } catch (err) {
    const e = err as { status?: number | null; stderr?: string; message?: string };
    const stderr = (e.stderr ?? '').toString();
    const m = /\[([a-z][a-z0-9-]*)\](?: \(stage=([a-z0-9-]+)\))?/.exec(stderr);
    const tag = m?.[1] ?? 'core-failure';
    const stage = m?.[2] ?? null;
    const text = stderr.trim() || e.message || 'core process failed';
    throw new MsentError(text, tag, stage, e.status ?? -1);
  }
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'msent-'));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

export function writeSignalCsv(samples: ArrayLike<number>, file: string): void {
  const rows = ['value'];
  for (let i = 0; i < samples.length; i++) {
    const v = samples[i] as number;
    if (!Number.isFinite(v)) {
      throw new MsentError(`sample ${i} is not finite`, 'invalid-argument', null, -1);
    }
    rows.push(String(v));
  }
  fs.writeFileSync(file, rows.join('\n') + '\n');
}

export function parseProfileCsv(file: string): ProfilePoint[] {
  const text = fs.readFileSync(file, 'utf8');
  const lines = text.split('\n').filter((l) => l.length > 0);
  if (lines[0] !== 'scale,value') {
    throw new MsentError(`bad profile header in ${file}`, 'input-format', null, -1);
  }
  return lines.slice(1).map((line) => {
    const [s, v] = line.split(',');
    return { scale: Number(s), value: Number(v) };
  });
}

function kernelArgs(opts: KernelOptions): string[] {
  const args: string[] = [];
  if (opts.m !== undefined) args.push('--m', String(opts.m));
  if (opts.r !== undefined) args.push('--r', String(opts.r));
  if (opts.n !== undefined) args.push('--n', String(opts.n));
  return args;
}

/**
 * Multiscale profile of one record through the core's `entropy` command.
 */
export function profile(
  samples: ArrayLike<number>,
  samplingRate: number,
  opts: ProfileOptions = {},
): ProfilePoint[] {
  return withTempDir((dir) => {
    const input = path.join(dir, 'input.csv');
    const out = path.join(dir, 'profile.csv');
    writeSignalCsv(samples, input);
    const args = [
      'entropy',
      '--input', input,
      '--fs', String(samplingRate),
      '--out', out,
      '--method', opts.method ?? 'mife',
      '--scales', opts.scales ?? '1..20',
      ...kernelArgs(opts),
    ];
    if (opts.rMode) args.push('--r-mode', opts.rMode);
    if (opts.band) args.push('--band', `${opts.band[0]},${opts.band[1]}`);
    runCore(args);
    return parseProfileCsv(out);
  });
}

/**
 * Fuzzy entropy of one sample vector.  Scale 1 of the coarse-grained
 * fuzzy profile is the original series, so this is the plain kernel.
 */
export function fuzzyEntropy(samples: ArrayLike<number>, opts: KernelOptions = {}): number {
  const pts = profile(samples, 1.0, { ...opts, method: 'mfe', scales: '1' });
  const first = pts[0];
  if (pts.length !== 1 || first === undefined || first.scale !== 1) {
    throw new MsentError('expected a single scale-1 row', 'input-format', null, -1);
  }
  return first.value;
}

function experimentArgs(spec: ExperimentSpec, out: string): string[] {
  const args = [
    'experiment',
    '--out', out,
    '--subjects', String(spec.subjects),
    '--seed', String(spec.seed),
  ];
  if (spec.method) args.push('--method', spec.method);
  if (spec.conditions) {
    const parts = Object.entries(spec.conditions).map(([lbl, hz]) => `${lbl}:${hz}`);
    args.push('--conditions', parts.join(','));
  }
  if (spec.channels) args.push('--channels', spec.channels.join(','));
  if (spec.scales) args.push('--scales', spec.scales);
  if (spec.rMode) args.push('--r-mode', spec.rMode);
  if (spec.band) args.push('--band', `${spec.band[0]},${spec.band[1]}`);
  if (spec.snr0 !== undefined) args.push('--snr0', String(spec.snr0));
  if (spec.decay !== undefined) args.push('--decay', String(spec.decay));
  if (spec.stimDur !== undefined) args.push('--stim-dur', String(spec.stimDur));
  if (spec.baselineDur !== undefined) args.push('--baseline-dur', String(spec.baselineDur));
  if (spec.nStimuli !== undefined) args.push('--n-stimuli', String(spec.nStimuli));
  if (spec.nBaselines !== undefined) args.push('--n-baselines', String(spec.nBaselines));
  if (spec.samplingRate !== undefined) args.push('--fs', String(spec.samplingRate));
  if (spec.noise) args.push('--noise', spec.noise);
  if (spec.workers !== undefined) args.push('--workers', String(spec.workers));
  return args;
}

/**
 * Run the full multi-subject experiment and return the validated result.
 */
export function runExperiment(spec: ExperimentSpec): ExperimentResult {
  if (!Number.isInteger(spec.subjects) || spec.subjects < 2) {
    throw new MsentError(
      `need at least 2 subjects, got ${spec.subjects}`,
      'invalid-argument', null, -1,
    );
  }
  return withTempDir((dir) => {
    const out = path.join(dir, 'run');
    runCore(experimentArgs(spec, out));
    const raw = JSON.parse(fs.readFileSync(path.join(out, 'result.json'), 'utf8'));
    return ExperimentResultSchema.parse(raw);
  });
}
