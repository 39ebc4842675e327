/* tslint:disable */
/* eslint-disable */

/**
 * The four coefficient paths of a simulation design over `t = 0..=periods`,
 * concatenated.
 */
export function coefficient_paths(dgp: number, periods: number, seed: bigint): Float64Array;

/**
 * Simulates `y_t = beta(t/n) x_t + sigma e_t` and estimates `beta` at `points`
 * evaluation times with both learners. Returns `[u, truth, lc, ll]`, each of
 * length `points`, concatenated.
 */
export function fit_curves(shape: string, n: number, noise: number, family: string, bandwidth: number, points: number, seed: bigint): Float64Array;

/**
 * Normalized weights on the times `i/n`, `i = 1..=n`, for evaluation point
 * `u`.
 */
export function kernel_weights(family: string, bandwidth: number, two_sided: boolean, n: number, u: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly coefficient_paths: (a: number, b: number, c: bigint) => [number, number, number, number];
    readonly fit_curves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint) => [number, number, number, number];
    readonly kernel_weights: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
