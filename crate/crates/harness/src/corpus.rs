//! Seeded test inputs: band-limited fields and nonnegative weights.
//!
//! Members are generated frequency by frequency in a fixed lattice order, so
//! the same seed yields the same underlying function on every grid that
//! resolves the band. That is what makes grid-doubling comparisons meaningful.

use std::f64::consts::{E, PI, TAU};

use loglp_core::{log_aperture, Params, RealField64, Spectral64, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    RandomBandlimited,
    WavePacket,
    Tone,
    ChirpLog,
}

impl CorpusKind {
    fn salt(self) -> u64 {
        match self {
            CorpusKind::RandomBandlimited => 0x9e37_79b9_7f4a_7c15,
            CorpusKind::WavePacket => 0xc2b2_ae3d_27d4_eb4f,
            CorpusKind::Tone => 0x1656_67b1_9e37_79f9,
            CorpusKind::ChirpLog => 0x27d4_eb2f_1656_67c5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::RandomBandlimited => "random_bandlimited",
            CorpusKind::WavePacket => "wave_packet",
            CorpusKind::Tone => "tone",
            CorpusKind::ChirpLog => "chirp_log",
        }
    }
}

/// One homogeneous batch of inputs whose spectra live in `2^lo ≤ |ξ| ≤ 2^hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub kind: CorpusKind,
    pub count: usize,
    pub band: (i32, i32),
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind, count: usize, band: (i32, i32), seed: u64) -> Self {
        Self { seed, kind, count, band }
    }

    pub fn descriptor(&self) -> String {
        format!(
            "{}x{}[2^{}..2^{}]#{}",
            self.count,
            self.kind.name(),
            self.band.0,
            self.band.1,
            self.seed
        )
    }

    /// The 8 random + 4 packet + 4 tone mix used by every experiment.
    pub fn default_mix(band: (i32, i32), seed: u64) -> Vec<CorpusSpec> {
        vec![
            CorpusSpec::new(CorpusKind::RandomBandlimited, 8, band, seed),
            CorpusSpec::new(CorpusKind::WavePacket, 4, band, seed),
            CorpusSpec::new(CorpusKind::Tone, 4, band, seed),
        ]
    }
}

/// `[k0 + 4, log₂ n - 4]`, the default band for grid size `n`; small grids
/// collapse to the top octave.
pub fn default_band(params: &Params, grid: &TorusGrid) -> (i32, i32) {
    let top = grid.n.trailing_zeros() as i32 - 4;
    ((params.k0 + 4).min(top).max(1), top.max(1))
}

pub fn describe(specs: &[CorpusSpec]) -> String {
    specs.iter().map(CorpusSpec::descriptor).collect::<Vec<_>>().join("+")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub field: Spectral64,
}

fn check_band(band: (i32, i32), grid: &TorusGrid) -> Result<()> {
    let (lo, hi) = band;
    let fail = |reason: String| Err(HarnessError::Band { lo, hi, reason });
    if lo < 1 || lo > hi {
        return fail("need 1 <= lo <= hi".into());
    }
    if (1u64 << hi) as usize > grid.n / 8 {
        return fail(format!("2^hi must not exceed n/8 = {}", grid.n / 8));
    }
    Ok(())
}

/// Lattice frequencies with `2^lo ≤ |ξ| ≤ 2^hi`, in lexicographic order.
fn band_frequencies(dim: usize, band: (i32, i32)) -> Vec<[i64; 2]> {
    let (lo, hi) = ((1i64 << band.0) as f64, 1i64 << band.1);
    let mut out = Vec::new();
    let inside = |f: [i64; 2]| {
        let r = ((f[0] * f[0] + f[1] * f[1]) as f64).sqrt();
        r >= lo && r <= hi as f64
    };
    match dim {
        1 => {
            for a in -hi..=hi {
                if inside([a, 0]) {
                    out.push([a, 0]);
                }
            }
        }
        _ => {
            for a in -hi..=hi {
                for b in -hi..=hi {
                    if inside([a, b]) {
                        out.push([a, b]);
                    }
                }
            }
        }
    }
    out
}

fn place(grid: &TorusGrid, coeffs: impl IntoIterator<Item = ([i64; 2], Complex64)>) -> Spectral64 {
    let mut s = Spectral64::zeros(*grid);
    for (f, c) in coeffs {
        let bin = grid.bin(&f[..grid.dim]).expect("band frequency inside the grid");
        s.coeffs_mut()[bin] = c;
    }
    normalize(s)
}

fn normalize(s: Spectral64) -> Spectral64 {
    let norm = s.coeff_l2();
    if norm == 0.0 {
        return s;
    }
    let scale = vec![norm.recip(); s.coeffs().len()];
    s.apply_mask(&scale).expect("grid-sized mask")
}

/// Deterministic members of `spec` on `grid`.
pub fn gen_corpus(spec: &CorpusSpec, grid: &TorusGrid, params: &Params) -> Result<Vec<Member>> {
    if spec.count == 0 {
        return Ok(Vec::new());
    }
    check_band(spec.band, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ spec.kind.salt());
    let freqs = band_frequencies(grid.dim, spec.band);
    let (lo, hi) = (spec.band.0 as f64, spec.band.1 as f64);
    let mut members = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let label = format!("{}#{i}", spec.kind.name());
        let field = match spec.kind {
            CorpusKind::RandomBandlimited => place(
                grid,
                freqs.iter().map(|&f| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    (f, Complex64::new(re, im))
                }),
            ),
            CorpusKind::WavePacket => {
                let radius = 2f64.powf(rng.random_range((lo + 0.5).min(hi)..=(hi - 0.5).max(lo)));
                let angle = rng.random_range(0.0..TAU);
                let center = match grid.dim {
                    1 => [if angle < PI { radius } else { -radius }, 0.0],
                    _ => [radius * angle.cos(), radius * angle.sin()],
                };
                let x0 = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
                let width = log_aperture(params.gamma, radius.recip());
                place(
                    grid,
                    freqs.iter().filter_map(|&f| {
                        let d0 = f[0] as f64 - center[0];
                        let d1 = f[1] as f64 - center[1];
                        let e = (d0 * d0 + d1 * d1) * width * width / 2.0;
                        (e < 40.0).then(|| {
                            let phase = -(f[0] as f64 * x0[0] + f[1] as f64 * x0[1]);
                            (f, Complex64::from_polar((-e).exp(), phase))
                        })
                    }),
                )
            }
            CorpusKind::Tone => {
                let k = spec.band.0 + (i as i32) % (spec.band.1 - spec.band.0 + 1);
                place(grid, [([1i64 << k, 0], Complex64::new(1.0, 0.0))])
            }
            CorpusKind::ChirpLog => {
                let x0 = rng.random_range(-PI..PI);
                let gamma = params.gamma;
                let scale = 2f64.powf(hi);
                let chirp = loglp_core::Field64::from_fn(*grid, |x| {
                    let r = match grid.dim {
                        1 => wrap(x[0] - x0).abs(),
                        _ => (wrap(x[0] - x0).powi(2) + wrap(x[1]).powi(2)).sqrt(),
                    };
                    Complex64::from_polar(1.0, (E + scale * r).ln().powf(gamma))
                })
                .forward();
                place(
                    grid,
                    freqs
                        .iter()
                        .map(|&f| (f, chirp.at(&f[..grid.dim]))),
                )
            }
        };
        members.push(Member { label, field });
    }
    Ok(members)
}

pub fn gen_corpora(specs: &[CorpusSpec], grid: &TorusGrid, params: &Params) -> Result<Vec<Member>> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(gen_corpus(spec, grid, params)?);
    }
    Ok(out)
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Constant,
    /// Gaussian bump of fixed physical width 0.05.
    Spike,
    /// `exp` of a random trigonometric polynomial of degree 8.
    SmoothRandom,
    /// `max(|x - x0|, 0.01)^{-1/2}`.
    PowerSingularity,
}

impl WeightKind {
    pub const ALL: [WeightKind; 4] = [
        WeightKind::Constant,
        WeightKind::Spike,
        WeightKind::SmoothRandom,
        WeightKind::PowerSingularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Constant => "constant",
            WeightKind::Spike => "spike",
            WeightKind::SmoothRandom => "smooth_random",
            WeightKind::PowerSingularity => "power_singularity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub label: String,
    pub field: RealField64,
}

const SPIKE_WIDTH: f64 = 0.05;
const SINGULARITY_CUTOFF: f64 = 0.01;
const SMOOTH_DEGREE: i64 = 8;

/// A weight of the given kind; like fields, independent of the grid size.
pub fn gen_weight(kind: WeightKind, seed: u64, index: usize, grid: &TorusGrid) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5851_f42d_4c95_7f2d).wrapping_mul(index as u64 + 1));
    let x0 = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
    let dist = |x: [f64; 2]| match grid.dim {
        1 => wrap(x[0] - x0[0]).abs(),
        _ => (wrap(x[0] - x0[0]).powi(2) + wrap(x[1] - x0[1]).powi(2)).sqrt(),
    };
    let field = match kind {
        WeightKind::Constant => RealField64::constant(*grid, 1.0),
        WeightKind::Spike => RealField64::from_fn(*grid, |x| (-(dist(x) / SPIKE_WIDTH).powi(2) / 2.0).exp()),
        WeightKind::SmoothRandom => {
            let dims = grid.dim;
            let mut terms = Vec::new();
            for a in -SMOOTH_DEGREE..=SMOOTH_DEGREE {
                for b in if dims == 1 { 0..=0 } else { -SMOOTH_DEGREE..=SMOOTH_DEGREE } {
                    if (a, b) == (0, 0) {
                        continue;
                    }
                    let amp: f64 = rng.sample(StandardNormal);
                    let phase = rng.random_range(0.0..TAU);
                    terms.push((a as f64, b as f64, amp * 0.3 / ((a * a + b * b) as f64).sqrt(), phase));
                }
            }
            RealField64::from_fn(*grid, |x| {
                terms
                    .iter()
                    .map(|&(a, b, amp, ph)| amp * (a * x[0] + b * x[1] + ph).cos())
                    .sum::<f64>()
                    .exp()
            })
        }
        WeightKind::PowerSingularity => {
            RealField64::from_fn(*grid, |x| dist(x).max(SINGULARITY_CUTOFF).powf(-0.5))
        }
    };
    Weight {
        label: format!("{}#{index}", kind.name()),
        field,
    }
}

pub fn gen_weights(kinds: &[WeightKind], seed: u64, grid: &TorusGrid) -> Vec<Weight> {
    kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| gen_weight(k, seed, i, grid))
        .collect()
}
