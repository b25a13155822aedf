/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_cornersolution_free: (a: number, b: number) => void;
export const __wbg_raster_free: (a: number, b: number) => void;
export const __wbg_windowcurve_free: (a: number, b: number) => void;
export const cornersolution_h1_error: (a: number) => number;
export const cornersolution_iterations: (a: number) => number;
export const cornersolution_l2_error: (a: number) => number;
export const cornersolution_nodes: (a: number) => [number, number];
export const cornersolution_triangles: (a: number) => [number, number];
export const cornersolution_values: (a: number) => [number, number];
export const raster_bounds: (a: number) => [number, number];
export const raster_data: (a: number) => [number, number];
export const raster_height: (a: number) => number;
export const raster_outline: (a: number) => [number, number];
export const raster_width: (a: number) => number;
export const solve_corner: (a: number, b: number, c: number) => [number, number, number];
export const weight_raster: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const window_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const windowcurve_a: (a: number) => [number, number];
export const windowcurve_coercivity: (a: number) => [number, number];
export const windowcurve_kappa: (a: number) => number;
export const windowcurve_onset: (a: number) => [number, number];
export const windowcurve_predicted: (a: number) => number;
export const windowcurve_threshold: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
