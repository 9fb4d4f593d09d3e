//! Inlier/outlier datasets, the spherize and symmetrize transforms, and the
//! generators for every data model the estimators are exercised on.
//!
//! Points are the columns of a D×N matrix. Datasets are multisets: duplicate
//! columns are allowed and are counted with multiplicity everywhere.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, RsrError};
use crate::grassmann::{self, AffineSubspace, Subspace, RANK_TOL};
use crate::linalg::{self, combinations};

/// Largest N accepted by [`symmetrize`].
pub const SYMMETRIZE_LIMIT: usize = 2000;
/// General position is verified exhaustively up to this many points.
pub const GENERAL_POSITION_CHECK_LIMIT: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub enum Truth {
    Linear(Subspace),
    Affine(AffineSubspace),
}

impl Truth {
    pub fn linear_part(&self) -> &Subspace {
        match self {
            Truth::Linear(s) => s,
            Truth::Affine(a) => a.linear(),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear_part().dim()
    }
}

/// Where a dataset came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeneratorMeta {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
}

impl GeneratorMeta {
    pub fn new(name: &str) -> Self {
        GeneratorMeta {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub points: DMatrix<f64>,
    pub inlier_mask: Vec<bool>,
    pub truth: Option<Truth>,
    /// Uniform bound on the inlier perturbation norms (0 for noiseless data).
    pub noise_level: f64,
    pub meta: GeneratorMeta,
}

impl LabeledDataset {
    pub fn new(points: DMatrix<f64>, inlier_mask: Vec<bool>, truth: Option<Truth>) -> Result<Self> {
        if inlier_mask.len() != points.ncols() {
            return Err(RsrError::DimensionMismatch(format!(
                "{} labels for {} points",
                inlier_mask.len(),
                points.ncols()
            )));
        }
        if let Some(t) = &truth {
            if t.linear_part().ambient_dim() != points.nrows() {
                return Err(RsrError::DimensionMismatch(
                    "truth lives in a different ambient space".into(),
                ));
            }
        }
        Ok(LabeledDataset {
            points,
            inlier_mask,
            truth,
            noise_level: 0.0,
            meta: GeneratorMeta::default(),
        })
    }

    /// Stacks an inlier block and an outlier block (inliers first).
    pub fn from_blocks(inliers: &DMatrix<f64>, outliers: &DMatrix<f64>, truth: Option<Truth>) -> Result<Self> {
        let rows = inliers.nrows().max(outliers.nrows());
        if (inliers.ncols() > 0 && inliers.nrows() != rows) || (outliers.ncols() > 0 && outliers.nrows() != rows) {
            return Err(RsrError::DimensionMismatch("blocks differ in ambient dimension".into()));
        }
        let n_in = inliers.ncols();
        let n = n_in + outliers.ncols();
        let mut points = DMatrix::zeros(rows, n);
        if n_in > 0 {
            points.columns_mut(0, n_in).copy_from(inliers);
        }
        if outliers.ncols() > 0 {
            points.columns_mut(n_in, outliers.ncols()).copy_from(outliers);
        }
        let mask = (0..n).map(|i| i < n_in).collect();
        LabeledDataset::new(points, mask, truth)
    }

    pub fn with_meta(mut self, meta: GeneratorMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }

    pub fn n_in(&self) -> usize {
        self.inlier_mask.iter().filter(|&&b| b).count()
    }

    pub fn n_out(&self) -> usize {
        self.len() - self.n_in()
    }

    /// `N_in / N_out`, infinite without outliers.
    pub fn snr(&self) -> f64 {
        snr(self.n_in(), self.n_out())
    }

    fn select(&self, want_inliers: bool) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.inlier_mask[i] == want_inliers)
            .collect();
        self.points.select_columns(&idx)
    }

    pub fn inliers(&self) -> DMatrix<f64> {
        self.select(true)
    }

    pub fn outliers(&self) -> DMatrix<f64> {
        self.select(false)
    }

    pub fn truth_subspace(&self) -> Option<&Subspace> {
        self.truth.as_ref().map(Truth::linear_part)
    }

    /// Multiplies column `i` by `factors[i]`; labels and truth are kept.
    pub fn rescaled(&self, factors: &[f64]) -> Self {
        let mut out = self.clone();
        for (j, &f) in factors.iter().enumerate() {
            out.points.column_mut(j).scale_mut(f);
        }
        out
    }

    /// Applies an orthogonal map to the points and the truth.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        let mut out = self.clone();
        out.points = rotation * &self.points;
        out.truth = match &self.truth {
            None => None,
            Some(Truth::Linear(s)) => Some(Truth::Linear(s.rotated(rotation)?)),
            Some(Truth::Affine(a)) => Some(Truth::Affine(AffineSubspace::through(
                a.linear().rotated(rotation)?,
                &(rotation * a.offset()),
            )?)),
        };
        Ok(out)
    }
}

pub fn snr(n_in: usize, n_out: usize) -> f64 {
    if n_out == 0 {
        f64::INFINITY
    } else {
        n_in as f64 / n_out as f64
    }
}

/// Kinds of inlier perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    /// Isotropic Gaussian with per-coordinate variance ε²/D, clipped to norm ε.
    GaussianClipped,
    /// Uniform in the ball of radius ε.
    UniformBall,
}

impl std::str::FromStr for NoiseKind {
    type Err = RsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseKind::None),
            "gaussian-clipped" => Ok(NoiseKind::GaussianClipped),
            "uniform-ball" => Ok(NoiseKind::UniformBall),
            other => Err(RsrError::invalid(
                "noise kind",
                format!("one of none, gaussian-clipped, uniform-ball (got `{other}`)"),
            )),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::None => "none",
            NoiseKind::GaussianClipped => "gaussian-clipped",
            NoiseKind::UniformBall => "uniform-ball",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub kind: NoiseKind,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            epsilon: 0.0,
            kind: NoiseKind::None,
        }
    }
}

/// Normalizes every column to unit length.
pub fn spherize(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(RsrError::ZeroColumn { index: j });
        }
        col /= norm;
    }
    Ok(out)
}

/// Index pair `(i, j)`, `i < j`, of column `k` of [`symmetrize`]'s output.
pub fn symmetrized_pair(n: usize, k: usize) -> (usize, usize) {
    let mut i = 0;
    let mut k = k;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// All pairwise differences `x_i − x_j`, `i < j`, in lexicographic order.
pub fn symmetrize(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.ncols();
    if n < 2 {
        return Err(RsrError::invalid("symmetrize", "at least two points"));
    }
    if n > SYMMETRIZE_LIMIT {
        return Err(RsrError::TooLarge {
            n,
            limit: SYMMETRIZE_LIMIT,
        });
    }
    let mut out = DMatrix::zeros(x.nrows(), n * (n - 1) / 2);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out.set_column(k, &(x.column(i) - x.column(j)));
            k += 1;
        }
    }
    Ok(out)
}

fn unit_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// Haystack model: inliers `N(0, σ_in² P_L/d)` on a uniformly random L, outliers
/// `N(0, σ_out² I/D)`.
pub fn gen_haystack<R: Rng + ?Sized>(
    ambient_dim: usize,
    dim: usize,
    n_in: usize,
    n_out: usize,
    sigma_in: f64,
    sigma_out: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if dim == 0 || dim > ambient_dim || n_in == 0 || !(sigma_in > 0.0) || !(sigma_out > 0.0) {
        return Err(RsrError::invalid(
            "haystack generator",
            "0 < d <= D, N_in > 0 and positive sigmas",
        ));
    }
    let truth = grassmann::random_subspace(ambient_dim, dim, rng);
    let coords = grassmann::gaussian_matrix(dim, n_in, rng) * (sigma_in / (dim as f64).sqrt());
    let inliers = truth.basis() * coords;
    let outliers = grassmann::gaussian_matrix(ambient_dim, n_out, rng) * (sigma_out / (ambient_dim as f64).sqrt());
    Ok(LabeledDataset::from_blocks(&inliers, &outliers, Some(Truth::Linear(truth)))?.with_meta(
        GeneratorMeta::new("haystack")
            .param("D", ambient_dim)
            .param("d", dim)
            .param("n_in", n_in)
            .param("n_out", n_out)
            .param("sigma_in", sigma_in)
            .param("sigma_out", sigma_out),
    ))
}

/// Every d-subset of the columns (given as coordinates in R^d) has full rank.
pub fn in_general_position(coords: &DMatrix<f64>) -> bool {
    let d = coords.nrows();
    combinations(coords.ncols(), d).all(|subset| {
        let sub = coords.select_columns(&subset);
        linalg::numerical_rank(&sub, RANK_TOL) == d
    })
}

/// `n_in` points uniform on `L ∩ S^{D−1}`. Up to [`GENERAL_POSITION_CHECK_LIMIT`]
/// points the draw is verified to be in general position and redrawn otherwise.
pub fn gen_general_position<R: Rng + ?Sized>(l: &Subspace, n_in: usize, rng: &mut R) -> Result<LabeledDataset> {
    let d = l.dim();
    if n_in < d {
        return Err(RsrError::invalid("general-position generator", format!("N_in >= d = {d}")));
    }
    let coords = loop {
        let mut c = DMatrix::zeros(d, n_in);
        for j in 0..n_in {
            c.set_column(j, &unit_gaussian(d, rng));
        }
        if n_in > GENERAL_POSITION_CHECK_LIMIT || in_general_position(&c) {
            break c;
        }
    };
    let points = l.basis() * coords;
    Ok(
        LabeledDataset::new(points, vec![true; n_in], Some(Truth::Linear(l.clone())))?
            .with_meta(GeneratorMeta::new("general_position").param("n_in", n_in)),
    )
}

/// `n_out` copies of `magnitude · direction/‖direction‖`.
pub fn gen_adversarial_line(direction: &DVector<f64>, n_out: usize, magnitude: f64) -> Result<DMatrix<f64>> {
    let norm = direction.norm();
    if norm == 0.0 {
        return Err(RsrError::ZeroVector);
    }
    if !(magnitude > 0.0) {
        return Err(RsrError::invalid("outlier magnitude", "a positive value"));
    }
    let point = direction * (magnitude / norm);
    Ok(DMatrix::from_fn(direction.len(), n_out, |i, _| point[i]))
}

/// General-position inliers on a random L plus `n_out` repeated outliers on one
/// random line through the origin, all at distance `magnitude`.
pub fn gen_adversarial<R: Rng + ?Sized>(
    ambient_dim: usize,
    dim: usize,
    n_in: usize,
    n_out: usize,
    magnitude: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if dim == 0 || dim >= ambient_dim {
        return Err(RsrError::invalid("adversarial generator", "0 < d < D"));
    }
    let truth = grassmann::random_subspace(ambient_dim, dim, rng);
    let inliers = gen_general_position(&truth, n_in, rng)?.points;
    let direction = unit_gaussian(ambient_dim, rng);
    let outliers = gen_adversarial_line(&direction, n_out, magnitude)?;
    Ok(LabeledDataset::from_blocks(&inliers, &outliers, Some(Truth::Linear(truth)))?.with_meta(
        GeneratorMeta::new("adversarial_line")
            .param("D", ambient_dim)
            .param("d", dim)
            .param("n_in", n_in)
            .param("n_out", n_out)
            .param("magnitude", magnitude),
    ))
}

/// Affine inliers `b* + B·z` (z standard normal, b* ⟂ L with unit norm) plus
/// `n_out` distinct outliers `c_k·v` on one random line through the origin,
/// `c_k` spaced evenly in `[magnitude/10, magnitude]`.
pub fn gen_affine_adversarial<R: Rng + ?Sized>(
    ambient_dim: usize,
    dim: usize,
    n_in: usize,
    n_out: usize,
    magnitude: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if dim == 0 || dim >= ambient_dim {
        return Err(RsrError::invalid("affine generator", "0 < d < D"));
    }
    if !(magnitude.is_finite() && magnitude > 0.0) {
        return Err(RsrError::invalid("magnitude", "must be positive and finite"));
    }
    let linear = grassmann::random_subspace(ambient_dim, dim, rng);
    let offset = loop {
        let b = linear.residual(&unit_gaussian(ambient_dim, rng));
        let n = b.norm();
        if n > 1e-6 {
            break b / n;
        }
    };
    let coords = grassmann::gaussian_matrix(dim, n_in, rng);
    let mut inliers = linear.basis() * coords;
    for mut col in inliers.column_iter_mut() {
        col += &offset;
    }
    let direction = unit_gaussian(ambient_dim, rng);
    let outliers = DMatrix::from_fn(ambient_dim, n_out, |i, k| {
        let c = if n_out > 1 {
            0.1 + 0.9 * k as f64 / (n_out - 1) as f64
        } else {
            1.0
        };
        magnitude * c * direction[i]
    });
    let truth = AffineSubspace::through(linear, &offset)?;
    Ok(LabeledDataset::from_blocks(&inliers, &outliers, Some(Truth::Affine(truth)))?.with_meta(
        GeneratorMeta::new("affine_line")
            .param("D", ambient_dim)
            .param("d", dim)
            .param("n_in", n_in)
            .param("n_out", n_out)
            .param("magnitude", magnitude),
    ))
}

fn check_fixture_dims(dim: usize, ambient_dim: usize) -> Result<()> {
    if dim == 0 || ambient_dim < dim + 1 {
        return Err(RsrError::invalid("fixture", format!("D >= d + 1, got d = {dim}, D = {ambient_dim}")));
    }
    Ok(())
}

/// Inliers split evenly over `e_1, …, e_d`; outliers all at `e_{d+1}`.
pub fn fixture_split_axes(dim: usize, ambient_dim: usize, n_in: usize, n_out: usize) -> Result<LabeledDataset> {
    check_fixture_dims(dim, ambient_dim)?;
    if n_in % dim != 0 {
        return Err(RsrError::Divisibility { n_in, d: dim });
    }
    let per_axis = n_in / dim;
    let mut inliers = DMatrix::zeros(ambient_dim, n_in);
    for j in 0..n_in {
        inliers[(j / per_axis, j)] = 1.0;
    }
    let mut outliers = DMatrix::zeros(ambient_dim, n_out);
    for j in 0..n_out {
        outliers[(dim, j)] = 1.0;
    }
    let axes: Vec<usize> = (0..dim).collect();
    let truth = Subspace::coordinate(ambient_dim, &axes)?;
    Ok(LabeledDataset::from_blocks(&inliers, &outliers, Some(Truth::Linear(truth)))?.with_meta(
        GeneratorMeta::new("split_axes")
            .param("d", dim)
            .param("D", ambient_dim)
            .param("n_in", n_in)
            .param("n_out", n_out),
    ))
}

/// `N_in − (d−1)` inliers at `e_1`, one inlier `√(N_in−(d−1))·e_j` for each
/// `j = 2..d`; outliers all at `e_{d+1}`.
pub fn fixture_heavy_axis(dim: usize, ambient_dim: usize, n_in: usize, n_out: usize) -> Result<LabeledDataset> {
    check_fixture_dims(dim, ambient_dim)?;
    if dim < 2 || n_in <= dim - 1 {
        return Err(RsrError::invalid("heavy-axis fixture", "d > 1 and N_in > d - 1"));
    }
    let heavy = n_in - (dim - 1);
    let scale = (heavy as f64).sqrt();
    let mut inliers = DMatrix::zeros(ambient_dim, n_in);
    for j in 0..heavy {
        inliers[(0, j)] = 1.0;
    }
    for axis in 1..dim {
        inliers[(axis, heavy + axis - 1)] = scale;
    }
    let mut outliers = DMatrix::zeros(ambient_dim, n_out);
    for j in 0..n_out {
        outliers[(dim, j)] = 1.0;
    }
    let axes: Vec<usize> = (0..dim).collect();
    let truth = Subspace::coordinate(ambient_dim, &axes)?;
    Ok(LabeledDataset::from_blocks(&inliers, &outliers, Some(Truth::Linear(truth)))?.with_meta(
        GeneratorMeta::new("heavy_axis")
            .param("d", dim)
            .param("D", ambient_dim)
            .param("n_in", n_in)
            .param("n_out", n_out),
    ))
}

/// Perturbs every inlier by a vector of norm at most `spec.epsilon`.
pub fn add_noise<R: Rng + ?Sized>(ds: &LabeledDataset, spec: NoiseSpec, rng: &mut R) -> Result<LabeledDataset> {
    if !(spec.epsilon >= 0.0) {
        return Err(RsrError::invalid("noise epsilon", "a nonnegative value"));
    }
    if spec.epsilon == 0.0 || spec.kind == NoiseKind::None {
        return Ok(ds.clone());
    }
    let dd = ds.ambient_dim();
    let mut out = ds.clone();
    for j in 0..ds.len() {
        if !ds.inlier_mask[j] {
            continue;
        }
        let perturbation = match spec.kind {
            NoiseKind::GaussianClipped => {
                let g = DVector::from_fn(dd, |_, _| rng.sample::<f64, _>(StandardNormal))
                    * (spec.epsilon / (dd as f64).sqrt());
                let n = g.norm();
                if n > spec.epsilon {
                    g * (spec.epsilon / n)
                } else {
                    g
                }
            }
            NoiseKind::UniformBall => {
                let radius = spec.epsilon * rng.random::<f64>().powf(1.0 / dd as f64);
                unit_gaussian(dd, rng) * radius
            }
            NoiseKind::None => unreachable!(),
        };
        let mut col = out.points.column_mut(j);
        col += perturbation;
    }
    out.noise_level = ds.noise_level + spec.epsilon;
    out.meta = ds
        .meta
        .clone()
        .param("noise", spec.kind)
        .param("epsilon", spec.epsilon);
    Ok(out)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the plain-text dataset format:
///
/// ```text
/// D N d_truth
/// <N lines, one point per line, D values each>
/// <one line of N 0/1 inlier flags>
/// <d_truth lines, one orthonormal truth basis column per line>
/// <optional line of D values: minimal-norm offset of an affine truth>
/// ```
///
/// Values are written with 17 significant digits.
pub fn write_dataset<W: Write>(ds: &LabeledDataset, mut w: W) -> Result<()> {
    let d_truth = ds.truth.as_ref().map_or(0, Truth::dim);
    writeln!(w, "{} {} {}", ds.ambient_dim(), ds.len(), d_truth)?;
    let row = |v: nalgebra::DVectorView<'_, f64>| {
        let mut s = String::new();
        for (i, x) in v.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{}", fmt_f64(*x));
        }
        s
    };
    for col in ds.points.column_iter() {
        writeln!(w, "{}", row(col.as_view()))?;
    }
    let mask: Vec<&str> = ds.inlier_mask.iter().map(|&b| if b { "1" } else { "0" }).collect();
    writeln!(w, "{}", mask.join(" "))?;
    if let Some(t) = &ds.truth {
        for col in t.linear_part().basis().column_iter() {
            writeln!(w, "{}", row(col.as_view()))?;
        }
        if let Truth::Affine(a) = t {
            writeln!(w, "{}", row(a.offset().column(0)))?;
        }
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<LabeledDataset> {
    let mut lines = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    let mut it = lines.into_iter();
    let parse_err = |line: usize, message: String| RsrError::Parse { line, message };
    let (hline, header) = it.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(hline, format!("header: {e}")))?;
    let [dd, n, d_truth] = fields[..] else {
        return Err(parse_err(hline, "header must be `D N d_truth`".into()));
    };
    let mut read_line = |expected: usize, what: &str| -> Result<(usize, Vec<f64>)> {
        let (ln, text) = it
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))?;
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(ln, format!("{what}: {e}")))?;
        if vals.len() != expected {
            return Err(parse_err(ln, format!("{what}: expected {expected} values, found {}", vals.len())));
        }
        Ok((ln, vals))
    };
    let mut points = DMatrix::zeros(dd, n);
    for j in 0..n {
        let (_, v) = read_line(dd, "point")?;
        points.set_column(j, &DVector::from_vec(v));
    }
    let (mask_line, flags) = read_line(n, "inlier mask")?;
    if let Some(bad) = flags.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(parse_err(mask_line, format!("inlier mask: flags must be 0 or 1, found {bad}")));
    }
    let mask: Vec<bool> = flags.into_iter().map(|v| v == 1.0).collect();
    let mut truth = None;
    if d_truth > 0 {
        let mut basis = DMatrix::zeros(dd, d_truth);
        for j in 0..d_truth {
            basis.set_column(j, &DVector::from_vec(read_line(dd, "truth basis")?.1));
        }
        let linear = Subspace::from_orthonormal(basis)?;
        truth = Some(match read_line(dd, "truth offset") {
            Ok((_, offset)) => Truth::Affine(AffineSubspace::from_parts(linear, DVector::from_vec(offset))?),
            Err(RsrError::Parse { line: 0, .. }) => Truth::Linear(linear),
            Err(e) => return Err(e),
        });
    }
    Ok(LabeledDataset::new(points, mask, truth)?.with_meta(GeneratorMeta::new("file")))
}

pub fn save_dataset(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_dataset(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(file))
}
