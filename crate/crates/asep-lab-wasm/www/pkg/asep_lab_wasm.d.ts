/* tslint:disable */
/* eslint-disable */

/**
 * E[q^{N_x(t)}] for x = 1..=x_max from the exact formula (𝗉 = 1, 𝗊 = q).
 */
export function first_moment_profile(t: number, q: number, rho: number, x_max: number): Float64Array;

/**
 * Monte Carlo estimates of the same profile: `[mean_1, se_1, mean_2, se_2, …]`.
 */
export function monte_carlo_profile(t: number, q: number, rho: number, x_max: number, trajectories: number, seed: number): Float64Array;

/**
 * E[Z(t, x)] for the Robin half-line heat equation on an even grid of `points` values in [0, x_max].
 */
export function she_first_moment(a: number, t: number, x_max: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly first_moment_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly monte_carlo_profile: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly she_first_moment: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
