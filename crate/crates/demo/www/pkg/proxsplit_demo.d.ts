/* tslint:disable */
/* eslint-disable */

/**
 * Flat rows of six: `κ̂` and five rate bounds.
 */
export function competingCurves(kappa_lo: number, kappa_hi: number, points: number): Float64Array;

/**
 * `1/√(βσ)`.
 */
export function gammaStar(sigma: number, beta: number): number;

/**
 * Flat rows of three: `γ`, bound, exact worst-case rate.
 */
export function rateCurve(sigma: number, beta: number, alpha: number, lo: number, hi: number, points: number): Float64Array;

/**
 * Flat rows of three: `z₁`, `z₂`, bound on `‖z^k‖`. The last entry is the rate.
 */
export function worstCaseTrajectory(sigma: number, beta: number, gamma: number, alpha: number, iters: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly competingCurves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly gammaStar: (a: number, b: number) => [number, number, number];
    readonly rateCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly worstCaseTrajectory: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
