/* tslint:disable */
/* eslint-disable */

/**
 * A P1 field on a triangle mesh with its error against the exact solution.
 */
export class CornerSolution {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly h1_error: number;
    readonly iterations: number;
    readonly l2_error: number;
    /**
     * `x0, y0, x1, y1, ...`
     */
    readonly nodes: Float64Array;
    /**
     * Node indices, three per triangle.
     */
    readonly triangles: Uint32Array;
    readonly values: Float64Array;
}

/**
 * Row-major samples over the bounding box; `NaN` outside the domain.
 */
export class Raster {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[xmin, ymin, xmax, ymax]`.
     */
    readonly bounds: Float64Array;
    readonly data: Float64Array;
    readonly height: number;
    /**
     * Vertex coordinates `x0, y0, x1, y1, ...` of the boundary cycle.
     */
    readonly outline: Float64Array;
    readonly width: number;
}

/**
 * Coercivity of the conjugated form along an index grid.
 */
export class WindowCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly a: Float64Array;
    readonly coercivity: Float64Array;
    /**
     * Variational Hardy constant of the mesh.
     */
    readonly kappa: number;
    /**
     * `[last stable a, first degraded a]`, empty if none degraded.
     */
    readonly onset: Float64Array;
    /**
     * `min_v pi / theta_v`.
     */
    readonly predicted: number;
    readonly threshold: number;
}

/**
 * Solves `-lap u = 0` on the L-shape with `u = r^(2/3) sin(2 theta/3)` on
 * the boundary, on a mesh graded with exponent `kappa`.
 */
export function solve_corner(h: number, kappa: number, levels: number): CornerSolution;

/**
 * Samples `eta` (`kind = "eta"`) or `r_omega` (`kind = "r_omega"`) on a
 * `width x height` grid. In 2D `r_omega` is the smoothed distance, so no
 * mesh is needed.
 */
export function weight_raster(domain_name: string, kind: string, width: number, height: number): Raster;

/**
 * Sweeps `a` over `samples` points of `[0, a_max]`.
 */
export function window_curve(domain_name: string, h: number, kappa: number, levels: number, a_max: number, samples: number): WindowCurve;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cornersolution_free: (a: number, b: number) => void;
    readonly __wbg_raster_free: (a: number, b: number) => void;
    readonly __wbg_windowcurve_free: (a: number, b: number) => void;
    readonly cornersolution_h1_error: (a: number) => number;
    readonly cornersolution_iterations: (a: number) => number;
    readonly cornersolution_l2_error: (a: number) => number;
    readonly cornersolution_nodes: (a: number) => [number, number];
    readonly cornersolution_triangles: (a: number) => [number, number];
    readonly cornersolution_values: (a: number) => [number, number];
    readonly raster_bounds: (a: number) => [number, number];
    readonly raster_data: (a: number) => [number, number];
    readonly raster_height: (a: number) => number;
    readonly raster_outline: (a: number) => [number, number];
    readonly raster_width: (a: number) => number;
    readonly solve_corner: (a: number, b: number, c: number) => [number, number, number];
    readonly weight_raster: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly window_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly windowcurve_a: (a: number) => [number, number];
    readonly windowcurve_coercivity: (a: number) => [number, number];
    readonly windowcurve_kappa: (a: number) => number;
    readonly windowcurve_onset: (a: number) => [number, number];
    readonly windowcurve_predicted: (a: number) => number;
    readonly windowcurve_threshold: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
