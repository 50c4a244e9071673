/* tslint:disable */
/* eslint-disable */

/**
 * Beam centres in (u, v) with their reuse colour.
 */
export function beam_lattice(coverage_deg: number, n_beams: number, reuse: number, carrier_hz: number): string;

/**
 * Slant ranges, delays, misalignment interval and Doppler for one orbit.
 */
export function geometry(altitude_km: number, user_elev_deg: number, gw_elev_deg: number, carrier_hz: number): string;

/**
 * Energy efficiency of the clustered NOMA scheme and the greedy baseline
 * for payloads of 1e5..8e5 bits on one random drop.
 */
export function noma_sweep(n_ues: number, n_subcarriers: number, circuit_power_w: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly beam_lattice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly geometry: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly noma_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
