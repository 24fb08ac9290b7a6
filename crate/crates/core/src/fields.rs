//! Periodic collocated grid fields and their finite-difference calculus.
//!
//! Fields live on an `nx × ny` periodic box and depend on `(x, y)` only, but
//! vectors carry three components and tensors the full 3×3 layout so that
//! formulas with a trace or a cross product keep their three-dimensional
//! coefficients. Every derivative is the second-order central difference with
//! periodic wrap, which makes `grad` and `div` exact negative adjoints under
//! the midpoint quadrature used by [`integrate`] and [`inner`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic rectangular grid with cell-centred samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2P {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2P {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per direction, got {nx}x{ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box lengths must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square `n × n` grid on the `(2π)²` box.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        let l = 2.0 * std::f64::consts::PI;
        Self::new(n, n, l, l)
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Smallest grid spacing.
    pub fn h(&self) -> f64 {
        self.dx().min(self.dy())
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub(crate) fn check_same(&self, other: &Grid2P) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    fn assert_same(&self, other: &Grid2P) {
        assert!(
            self == other,
            "incompatible fields: grid {:?} vs {:?}",
            self.shape(),
            other.shape()
        );
    }

    /// Orthonormal (in the discrete L2 sense) basis of grid functions that
    /// the central difference annihilates: the constant plus, for even cell
    /// counts, the checkerboard modes.
    pub fn null_modes(&self) -> Vec<Vec<f64>> {
        let mut modes = Vec::with_capacity(4);
        let n = self.len() as f64;
        let norm = 1.0 / (n * self.cell_area()).sqrt();
        let even_x = self.nx % 2 == 0;
        let even_y = self.ny % 2 == 0;
        let patterns: [(bool, bool, bool); 4] = [
            (true, false, false),
            (even_x, true, false),
            (even_y, false, true),
            (even_x && even_y, true, true),
        ];
        for (present, alt_x, alt_y) in patterns {
            if !present {
                continue;
            }
            let mut m = vec![0.0; self.len()];
            for j in 0..self.ny {
                for i in 0..self.nx {
                    let sx = if alt_x && i % 2 == 1 { -1.0 } else { 1.0 };
                    let sy = if alt_y && j % 2 == 1 { -1.0 } else { 1.0 };
                    m[self.idx(i, j)] = sx * sy * norm;
                }
            }
            modes.push(m);
        }
        modes
    }
}

fn ddx(g: &Grid2P, src: &[f64], out: &mut [f64]) {
    let s = 0.5 / g.dx();
    let nx = g.nx;
    for j in 0..g.ny {
        let row = j * nx;
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            out[row + i] = (src[row + ip] - src[row + im]) * s;
        }
    }
}

fn ddy(g: &Grid2P, src: &[f64], out: &mut [f64]) {
    let s = 0.5 / g.dy();
    let (nx, ny) = (g.nx, g.ny);
    for j in 0..ny {
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            out[j * nx + i] = (src[jp * nx + i] - src[jm * nx + i]) * s;
        }
    }
}

fn lap5(g: &Grid2P, src: &[f64], out: &mut [f64]) {
    let (nx, ny) = (g.nx, g.ny);
    let cx = 1.0 / (g.dx() * g.dx());
    let cy = 1.0 / (g.dy() * g.dy());
    for j in 0..ny {
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let c = src[j * nx + i];
            out[j * nx + i] = cx * (src[j * nx + ip] - 2.0 * c + src[j * nx + im])
                + cy * (src[jp * nx + i] - 2.0 * c + src[jm * nx + i]);
        }
    }
}

fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes the components of `data` along the grid's null modes, returning
/// the L2 norm of what was removed.
fn project_out(g: &Grid2P, data: &mut [f64], modes: &[Vec<f64>]) -> f64 {
    let w = g.cell_area();
    let mut removed = 0.0;
    for m in modes {
        let c = dot_slices(data, m) * w;
        removed += c * c;
        for (d, mv) in data.iter_mut().zip(m) {
            *d -= c * mv;
        }
    }
    removed.sqrt()
}

// ---------------------------------------------------------------------------
// Scalar fields

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2P,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2P) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2P, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2P, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid2P, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Grid2P {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.grid.assert_same(&other.grid);
        Self {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn integral(&self) -> f64 {
        integrate(self)
    }

    /// Discrete L2 norm, `sqrt(∫ s²)`.
    pub fn norm_l2(&self) -> f64 {
        (dot_slices(&self.data, &self.data) * self.grid.cell_area()).sqrt()
    }

    /// Root mean square of the samples.
    pub fn rms(&self) -> f64 {
        (dot_slices(&self.data, &self.data) / self.data.len() as f64).sqrt()
    }

    /// Splits into the part orthogonal to the central-difference null space
    /// and returns the norm of the removed part.
    pub fn project_range(&mut self) -> f64 {
        let modes = self.grid.null_modes();
        project_out(&self.grid, &mut self.data, &modes)
    }
}

// ---------------------------------------------------------------------------
// Vector fields

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid2P,
    c: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid2P) -> Self {
        Self::constant(grid, [0.0; 3])
    }

    pub fn constant(grid: Grid2P, value: [f64; 3]) -> Self {
        let n = grid.len();
        Self {
            grid,
            c: [vec![value[0]; n], vec![value[1]; n], vec![value[2]; n]],
        }
    }

    pub fn from_fn(grid: Grid2P, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let v = f(grid.x(i), grid.y(j));
                let k = grid.idx(i, j);
                for (c, vc) in out.c.iter_mut().zip(v) {
                    c[k] = vc;
                }
            }
        }
        out
    }

    pub fn from_components(grid: Grid2P, c: [Vec<f64>; 3]) -> Result<Self> {
        for comp in &c {
            if comp.len() != grid.len() {
                return Err(Error::InvalidGrid(format!(
                    "expected {} samples per component, got {}",
                    grid.len(),
                    comp.len()
                )));
            }
        }
        Ok(Self { grid, c })
    }

    pub fn from_scalars(x: &ScalarField, y: &ScalarField, z: &ScalarField) -> Self {
        x.grid.assert_same(&y.grid);
        x.grid.assert_same(&z.grid);
        Self {
            grid: x.grid,
            c: [x.data.clone(), y.data.clone(), z.data.clone()],
        }
    }

    pub fn grid(&self) -> &Grid2P {
        &self.grid
    }

    pub fn comp(&self, i: usize) -> &[f64] {
        &self.c[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.c[i]
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.c[i].clone(),
        }
    }

    pub fn at(&self, k: usize) -> [f64; 3] {
        [self.c[0][k], self.c[1][k], self.c[2][k]]
    }

    /// Multiplies every component by a scalar field.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        self.grid.assert_same(&s.grid);
        let mut out = self.clone();
        for comp in out.c.iter_mut() {
            for (v, w) in comp.iter_mut().zip(&s.data) {
                *v *= w;
            }
        }
        out
    }

    /// Divides every component by a scalar field.
    pub fn div_by(&self, s: &ScalarField) -> Self {
        self.scale_by(&s.map(|v| 1.0 / v))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        self.grid.assert_same(&other.grid);
        let data = (0..self.grid.len())
            .map(|k| (0..3).map(|i| self.c[i][k] * other.c[i][k]).sum())
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    /// Pointwise cross product `self × other`.
    pub fn cross(&self, other: &Self) -> Self {
        self.grid.assert_same(&other.grid);
        let mut out = Self::zeros(self.grid);
        for k in 0..self.grid.len() {
            let a = self.at(k);
            let b = other.at(k);
            out.c[0][k] = a[1] * b[2] - a[2] * b[1];
            out.c[1][k] = a[2] * b[0] - a[0] * b[2];
            out.c[2][k] = a[0] * b[1] - a[1] * b[0];
        }
        out
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        [
            self.c[0].iter().sum::<f64>() / n,
            self.c[1].iter().sum::<f64>() / n,
            self.c[2].iter().sum::<f64>() / n,
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|k| {
                let a = self.at(k);
                (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.c.iter().map(|c| dot_slices(c, c)).sum();
        (s * self.grid.cell_area()).sqrt()
    }

    pub fn rms(&self) -> f64 {
        let s: f64 = self.c.iter().map(|c| dot_slices(c, c)).sum();
        (s / self.grid.len() as f64).sqrt()
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.grid.assert_same(&x.grid);
        for (dst, src) in self.c.iter_mut().zip(&x.c) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.grid.len());
        for c in &self.c {
            out.extend_from_slice(c);
        }
        out
    }

    pub fn from_flat(grid: Grid2P, flat: &[f64]) -> Self {
        let n = grid.len();
        assert_eq!(flat.len(), 3 * n, "flat vector length");
        Self {
            grid,
            c: [
                flat[..n].to_vec(),
                flat[n..2 * n].to_vec(),
                flat[2 * n..].to_vec(),
            ],
        }
    }

    /// Removes the null-space modes of the central difference from each
    /// component (mean and, for even counts, checkerboards). Returns the
    /// norm of the removed part.
    pub fn project_range(&mut self) -> f64 {
        let modes = self.grid.null_modes();
        let grid = self.grid;
        let removed: f64 = self
            .c
            .iter_mut()
            .map(|c| project_out(&grid, c, &modes).powi(2))
            .sum();
        removed.sqrt()
    }

    /// Subtracts the per-component mean.
    pub fn remove_mean(&mut self) -> [f64; 3] {
        let m = self.mean();
        for (c, mi) in self.c.iter_mut().zip(m) {
            for v in c.iter_mut() {
                *v -= mi;
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Tensor fields

/// Index of the stored symmetric-tensor components.
pub mod sym {
    pub const XX: usize = 0;
    pub const YY: usize = 1;
    pub const ZZ: usize = 2;
    pub const XY: usize = 3;
    pub const XZ: usize = 4;
    pub const YZ: usize = 5;

    /// Storage slot of entry `(i, j)`.
    pub const fn slot(i: usize, j: usize) -> usize {
        match (i, j) {
            (0, 0) => XX,
            (1, 1) => YY,
            (2, 2) => ZZ,
            (0, 1) | (1, 0) => XY,
            (0, 2) | (2, 0) => XZ,
            _ => YZ,
        }
    }
}

/// Symmetric 3×3 tensor field storing `xx, yy, zz, xy, xz, yz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    grid: Grid2P,
    c: [Vec<f64>; 6],
}

impl SymTensorField {
    pub fn zeros(grid: Grid2P) -> Self {
        let n = grid.len();
        Self {
            grid,
            c: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn constant(grid: Grid2P, value: [f64; 6]) -> Self {
        let n = grid.len();
        Self {
            grid,
            c: std::array::from_fn(|s| vec![value[s]; n]),
        }
    }

    pub fn grid(&self) -> &Grid2P {
        &self.grid
    }

    pub fn slot(&self, s: usize) -> &[f64] {
        &self.c[s]
    }

    pub fn slot_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.c[s]
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        &self.c[sym::slot(i, j)]
    }

    pub fn trace(&self) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|k| self.c[sym::XX][k] + self.c[sym::YY][k] + self.c[sym::ZZ][k])
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    /// Pointwise full contraction `Σ_ij A_ij B_ij`.
    pub fn contract(&self, other: &Self) -> ScalarField {
        self.grid.assert_same(&other.grid);
        let data = (0..self.grid.len())
            .map(|k| {
                let diag: f64 = (0..3).map(|s| self.c[s][k] * other.c[s][k]).sum();
                let off: f64 = (3..6).map(|s| self.c[s][k] * other.c[s][k]).sum();
                diag + 2.0 * off
            })
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.c.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Full 3×3 tensor field; entry `(i, j)` holds `∂_j v_i` for a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid2P,
    c: [Vec<f64>; 9],
}

impl TensorField {
    pub fn zeros(grid: Grid2P) -> Self {
        let n = grid.len();
        Self {
            grid,
            c: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn grid(&self) -> &Grid2P {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        &self.c[3 * i + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        &mut self.c[3 * i + j]
    }

    pub fn trace(&self) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|k| self.c[0][k] + self.c[4][k] + self.c[8][k])
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

// ---------------------------------------------------------------------------
// Arithmetic

macro_rules! impl_linear_ops {
    ($t:ty) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out += rhs;
                out
            }
        }

        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                let mut out = self.clone();
                out -= rhs;
                out
            }
        }

        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, a: f64) -> $t {
                let mut out = self.clone();
                out.for_each_value(|v| *v *= a);
                out
            }
        }

        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }

        impl AddAssign<&$t> for $t {
            fn add_assign(&mut self, rhs: &$t) {
                self.grid.assert_same(&rhs.grid);
                self.zip_values(rhs, |a, b| *a += b);
            }
        }

        impl SubAssign<&$t> for $t {
            fn sub_assign(&mut self, rhs: &$t) {
                self.grid.assert_same(&rhs.grid);
                self.zip_values(rhs, |a, b| *a -= b);
            }
        }
    };
}

impl ScalarField {
    fn for_each_value(&mut self, f: impl Fn(&mut f64)) {
        self.data.iter_mut().for_each(f);
    }

    fn zip_values(&mut self, rhs: &Self, f: impl Fn(&mut f64, f64)) {
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            f(a, b);
        }
    }
}

impl VectorField {
    fn for_each_value(&mut self, f: impl Fn(&mut f64)) {
        self.c.iter_mut().flat_map(|c| c.iter_mut()).for_each(f);
    }

    fn zip_values(&mut self, rhs: &Self, f: impl Fn(&mut f64, f64)) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            for (x, &y) in a.iter_mut().zip(b) {
                f(x, y);
            }
        }
    }
}

impl SymTensorField {
    fn for_each_value(&mut self, f: impl Fn(&mut f64)) {
        self.c.iter_mut().flat_map(|c| c.iter_mut()).for_each(f);
    }

    fn zip_values(&mut self, rhs: &Self, f: impl Fn(&mut f64, f64)) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            for (x, &y) in a.iter_mut().zip(b) {
                f(x, y);
            }
        }
    }
}

impl_linear_ops!(ScalarField);
impl_linear_ops!(VectorField);
impl_linear_ops!(SymTensorField);

// ---------------------------------------------------------------------------
// Differential operators

pub fn grad_scalar(s: &ScalarField) -> VectorField {
    let g = s.grid;
    let mut out = VectorField::zeros(g);
    ddx(&g, &s.data, &mut out.c[0]);
    ddy(&g, &s.data, &mut out.c[1]);
    out
}

/// `∇v` with entry `(i, j) = ∂_j v_i`; the `j = z` column is zero.
pub fn grad_vector(v: &VectorField) -> TensorField {
    let g = v.grid;
    let mut out = TensorField::zeros(g);
    for i in 0..3 {
        ddx(&g, &v.c[i], &mut out.c[3 * i]);
        ddy(&g, &v.c[i], &mut out.c[3 * i + 1]);
    }
    out
}

pub fn div_vector(v: &VectorField) -> ScalarField {
    let g = v.grid;
    let mut a = vec![0.0; g.len()];
    let mut b = vec![0.0; g.len()];
    ddx(&g, &v.c[0], &mut a);
    ddy(&g, &v.c[1], &mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x += y;
    }
    ScalarField { grid: g, data: a }
}

/// `(∇·T)_i = Σ_j ∂_j T_ij`.
pub fn div_tensor(t: &SymTensorField) -> VectorField {
    let g = t.grid;
    let mut out = VectorField::zeros(g);
    let mut tmp = vec![0.0; g.len()];
    for i in 0..3 {
        ddx(&g, t.get(i, 0), &mut out.c[i]);
        ddy(&g, t.get(i, 1), &mut tmp);
        for (o, d) in out.c[i].iter_mut().zip(&tmp) {
            *o += d;
        }
    }
    out
}

pub fn curl(v: &VectorField) -> VectorField {
    let g = v.grid;
    let n = g.len();
    let mut out = VectorField::zeros(g);
    let mut dzy = vec![0.0; n];
    let mut dzx = vec![0.0; n];
    let mut dyx = vec![0.0; n];
    let mut dxy = vec![0.0; n];
    ddy(&g, &v.c[2], &mut dzy);
    ddx(&g, &v.c[2], &mut dzx);
    ddx(&g, &v.c[1], &mut dyx);
    ddy(&g, &v.c[0], &mut dxy);
    out.c[0] = dzy;
    out.c[1] = dzx.iter().map(|d| -d).collect();
    out.c[2] = dyx.iter().zip(&dxy).map(|(a, b)| a - b).collect();
    out
}

/// Compact five-point Laplacian, componentwise.
pub fn laplacian(v: &VectorField) -> VectorField {
    let g = v.grid;
    let mut out = VectorField::zeros(g);
    for i in 0..3 {
        lap5(&g, &v.c[i], &mut out.c[i]);
    }
    out
}

/// `div(grad s)` built from the same central differences as every other
/// operator (a wide, `2h` stencil); its null space is that of [`grad_scalar`].
pub fn laplacian_wide_scalar(s: &ScalarField) -> ScalarField {
    div_vector(&grad_scalar(s))
}

/// Symmetric gradient `D = ½(∇v + ∇vᵀ)`.
pub fn sym_grad(v: &VectorField) -> SymTensorField {
    let g = v.grid;
    let gv = grad_vector(v);
    let mut d = SymTensorField::zeros(g);
    for i in 0..3 {
        for j in i..3 {
            let a = gv.get(i, j);
            let b = gv.get(j, i);
            let dst = &mut d.c[sym::slot(i, j)];
            for k in 0..g.len() {
                dst[k] = 0.5 * (a[k] + b[k]);
            }
        }
    }
    d
}

/// Advective derivative `(a·∇)u`.
pub fn advect(a: &VectorField, u: &VectorField) -> VectorField {
    a.grid.assert_same(&u.grid);
    let g = a.grid;
    let n = g.len();
    let mut out = VectorField::zeros(g);
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for i in 0..3 {
        ddx(&g, &u.c[i], &mut dx);
        ddy(&g, &u.c[i], &mut dy);
        for k in 0..n {
            out.c[i][k] = a.c[0][k] * dx[k] + a.c[1][k] * dy[k];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Quadrature

/// Midpoint-rule integral over the box (per unit depth).
pub fn integrate(s: &ScalarField) -> f64 {
    s.data.iter().sum::<f64>() * s.grid.cell_area()
}

/// `∫ u·w`.
pub fn inner(u: &VectorField, w: &VectorField) -> Result<f64> {
    u.grid.check_same(&w.grid)?;
    let s: f64 = (0..3).map(|i| dot_slices(&u.c[i], &w.c[i])).sum();
    Ok(s * u.grid.cell_area())
}

/// `∫ s·r`.
pub fn inner_scalar(s: &ScalarField, r: &ScalarField) -> Result<f64> {
    s.grid.check_same(&r.grid)?;
    Ok(dot_slices(&s.data, &r.data) * s.grid.cell_area())
}
