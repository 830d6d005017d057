/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curve_free: (a: number, b: number) => void;
export const curve_obw: (a: number) => number;
export const curve_reference: (a: number) => [number, number];
export const curve_reference_obw: (a: number) => number;
export const curve_threshold_l: (a: number) => number;
export const curve_x: (a: number) => [number, number];
export const curve_y: (a: number) => [number, number];
export const length_pdf: (a: number, b: number) => [number, number, number];
export const power_spectrum: (a: number, b: number) => [number, number, number];
export const stationary_acf: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
