/* tslint:disable */
/* eslint-disable */

/**
 * Paired samples for plotting; `reference` is the fixed-length curve when
 * there is one (empty otherwise).
 */
export class Curve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Occupied bandwidth at β = 0.05 (NaN for non-spectrum curves).
     */
    readonly obw: number;
    readonly reference: Float64Array;
    readonly reference_obw: number;
    readonly threshold_l: number;
    readonly x: Float64Array;
    readonly y: Float64Array;
}

/**
 * Symbol-length density on `[0, support]`.
 */
export function length_pdf(gamma_db: number, points: number): Curve;

/**
 * PSD on `|f| ≤ f_max` with both occupied bandwidths at β = 0.05.
 */
export function power_spectrum(gamma_db: number, f_max: number): Curve;

/**
 * Stationary autocorrelation on `[0, tau_max]`, with the fixed-length triangle.
 */
export function stationary_acf(gamma_db: number, tau_max: number, points: number): Curve;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curve_free: (a: number, b: number) => void;
    readonly curve_obw: (a: number) => number;
    readonly curve_reference: (a: number) => [number, number];
    readonly curve_reference_obw: (a: number) => number;
    readonly curve_threshold_l: (a: number) => number;
    readonly curve_x: (a: number) => [number, number];
    readonly curve_y: (a: number) => [number, number];
    readonly length_pdf: (a: number, b: number) => [number, number, number];
    readonly power_spectrum: (a: number, b: number) => [number, number, number];
    readonly stationary_acf: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
