//! QMC pipelines over the 15-dimensional state space and the 14-dimensional
//! separable boundary.
//!
//! Sample offsets `0..samples` map to Halton indices `skip+1..`. Offsets are
//! grouped into fixed-size chunks. Each chunk keeps exact fixed-point sums, so
//! totals do not depend on how chunks were scheduled or merged. Batches for
//! the dispersion estimate are formed at report time from consecutive chunks.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::{self, lookup};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::measures::{self, MetricConvention};
use crate::qmc::{HaltonStream, Scramble, MAX_DIMENSION};
use crate::report::{sig17, Estimate, EstimateReport, Sig17};
use crate::separability::{self, Verdict};
use crate::state_space::{self, EigenAngles, UnitaryCoords};
use crate::linalg::ipow;

pub const DEFAULT_BATCHES: u32 = 32;
pub const DEFAULT_GRID_CELLS: usize = 64;
pub const MAX_DEFAULT_CHUNK: u64 = 8192;
pub const ROOT_TOL: f64 = 1e-10;

const FIXED_FRAC_BITS: i32 = 90;
const FIXED_MAX_ABS: f64 = 68719476736.0;
const CHECKPOINT_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunType {
    Volume,
    BoundarySeparable,
}

impl RunType {
    pub fn name(self) -> &'static str {
        match self {
            RunType::Volume => "volume",
            RunType::BoundarySeparable => "boundary-separable",
        }
    }

    pub fn roles(self) -> DimensionRoles {
        match self {
            RunType::Volume => DimensionRoles { unitary: 0..12, angles: 12..15 },
            RunType::BoundarySeparable => DimensionRoles { unitary: 0..12, angles: 12..14 },
        }
    }

    pub fn dimension(self) -> usize {
        self.roles().angles.end
    }

    fn sums(self) -> usize {
        match self {
            RunType::Volume => VOLUME_SUMS.len(),
            RunType::BoundarySeparable => BOUNDARY_SUMS.len(),
        }
    }

    fn counts(self) -> usize {
        match self {
            RunType::Volume => VOLUME_COUNTS.len(),
            RunType::BoundarySeparable => BOUNDARY_COUNTS.len(),
        }
    }
}

const VOLUME_SUMS: [&str; 4] = ["w", "w_sep", "w_negativity", "w_concurrence"];
const VOLUME_COUNTS: [&str; 3] = ["separable", "entangled", "boundary_hits"];
const BOUNDARY_SUMS: [&str; 1] = ["root_weight"];
const BOUNDARY_COUNTS: [&str; 3] = ["root_points", "roots", "grid_zero_hits"];

/// Which hypercube coordinates feed the frame and which the angles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionRoles {
    pub unitary: std::ops::Range<usize>,
    pub angles: std::ops::Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run_type: RunType,
    pub samples: u64,
    pub skip: u64,
    pub scramble: Scramble,
    pub metric: MetricConvention,
    pub chunk_size: u64,
    pub batches: u32,
    /// Scan cells for boundary roots; unused by volume runs.
    pub grid_cells: usize,
}

#[derive(Serialize)]
struct HashedFields<'a> {
    run_type: RunType,
    skip: u64,
    scramble: &'a Scramble,
    metric: MetricConvention,
    chunk_size: u64,
    batches: u32,
    grid_cells: usize,
}

impl RunConfig {
    pub fn new(run_type: RunType, samples: u64, scramble: Scramble) -> Self {
        Self {
            run_type,
            samples,
            skip: 0,
            scramble,
            metric: MetricConvention::Sd,
            chunk_size: Self::default_chunk_size(samples, DEFAULT_BATCHES),
            batches: DEFAULT_BATCHES,
            grid_cells: DEFAULT_GRID_CELLS,
        }
    }

    /// About four chunks per batch, capped.
    pub fn default_chunk_size(samples: u64, batches: u32) -> u64 {
        (samples / (4 * u64::from(batches.max(1)))).clamp(1, MAX_DEFAULT_CHUNK)
    }

    pub fn chunk_count(&self) -> u64 {
        self.samples.div_ceil(self.chunk_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::Config(format!("need at least 2 batches, got {}", self.batches)));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk size must be positive".into()));
        }
        if self.samples < u64::from(self.batches) {
            return Err(Error::Config(format!("samples ({}) < batches ({})", self.samples, self.batches)));
        }
        if self.chunk_count() < u64::from(self.batches) {
            return Err(Error::Config(format!(
                "{} chunks of {} cannot fill {} batches",
                self.chunk_count(),
                self.chunk_size,
                self.batches
            )));
        }
        if self.run_type == RunType::BoundarySeparable && self.grid_cells == 0 {
            return Err(Error::Config("grid cells must be positive".into()));
        }
        if self.run_type.dimension() > MAX_DIMENSION {
            return Err(Error::Config("stream dimension too large".into()));
        }
        self.skip
            .checked_add(self.samples)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| Error::Config("skip + samples overflows".into()))?;
        Ok(())
    }

    /// First 8 bytes of SHA-256 over the fields that fix every per-index
    /// value and the batch layout. The sample count is excluded so that a run
    /// can be extended.
    pub fn config_hash(&self) -> String {
        let fields = HashedFields {
            run_type: self.run_type,
            skip: self.skip,
            scramble: &self.scramble,
            metric: self.metric,
            chunk_size: self.chunk_size,
            batches: self.batches,
            grid_cells: if self.run_type == RunType::BoundarySeparable { self.grid_cells } else { 0 },
        };
        let bytes = serde_json::to_vec(&fields).expect("config serialization");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serialization");
        let o = v.as_object_mut().expect("config is an object");
        o.insert("config_hash".into(), self.config_hash().into());
        o.insert("roles".into(), serde_json::to_value(self.run_type.roles()).expect("roles"));
        v
    }
}

fn to_fixed(x: f64) -> Result<i128> {
    if !x.is_finite() || x.abs() > FIXED_MAX_ABS {
        return Err(Error::Overflow);
    }
    Ok((x * ipow(2.0, FIXED_FRAC_BITS)).round() as i128)
}

fn from_fixed(v: i128) -> f64 {
    v as f64 * ipow(2.0, -FIXED_FRAC_BITS)
}

/// `0x<hex>p-90`, exactly representing a fixed-point sum.
pub fn fixed_to_hex(v: i128) -> String {
    let sign = if v < 0 { "-" } else { "" };
    format!("{sign}0x{:x}p-{FIXED_FRAC_BITS}", v.unsigned_abs())
}

pub fn fixed_from_hex(s: &str) -> Result<i128> {
    let bad = || Error::Checkpoint(format!("malformed accumulator {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let suffix = format!("p-{FIXED_FRAC_BITS}");
    let hex = body.strip_prefix("0x").and_then(|b| b.strip_suffix(suffix.as_str())).ok_or_else(bad)?;
    let mag = u128::from_str_radix(hex, 16).map_err(|_| bad())?;
    let v = i128::try_from(mag).map_err(|_| bad())?;
    Ok(if neg { -v } else { v })
}

/// Sums over a contiguous offset range inside one chunk. Weights are held in
/// the Bures normalization whatever the run metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSums {
    pub start: u64,
    pub points: u64,
    pub sums: Vec<i128>,
    pub counts: Vec<u64>,
}

impl ChunkSums {
    fn empty(run_type: RunType, start: u64) -> Self {
        Self { start, points: 0, sums: vec![0; run_type.sums()], counts: vec![0; run_type.counts()] }
    }

    fn end(&self) -> u64 {
        self.start + self.points
    }

    fn absorb(&mut self, other: &ChunkSums) -> Result<()> {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a = a.checked_add(*b).ok_or(Error::Overflow)?;
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.points += other.points;
        Ok(())
    }
}

/// Accumulated sums keyed by chunk number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorState {
    pub config_hash: String,
    pub run_type: RunType,
    pub chunk_size: u64,
    pub chunks: BTreeMap<u64, ChunkSums>,
}

impl EstimatorState {
    pub fn empty(cfg: &RunConfig) -> Self {
        Self {
            config_hash: cfg.config_hash(),
            run_type: cfg.run_type,
            chunk_size: cfg.chunk_size,
            chunks: BTreeMap::new(),
        }
    }

    pub fn points(&self) -> u64 {
        self.chunks.values().map(|c| c.points).sum()
    }

    /// Length of the completed prefix `0..n` of offsets.
    pub fn completed_prefix(&self) -> u64 {
        let mut n = 0;
        for (&k, c) in &self.chunks {
            if c.start != k * self.chunk_size || c.start != n {
                break;
            }
            n = c.end();
            if c.points < self.chunk_size {
                break;
            }
        }
        n
    }

    fn insert(&mut self, c: ChunkSums) -> Result<()> {
        let key = c.start / self.chunk_size;
        if c.points > 0 && (c.end() - 1) / self.chunk_size != key {
            return Err(Error::Numerical("chunk sums straddle a chunk boundary".into()));
        }
        match self.chunks.get_mut(&key) {
            None => {
                self.chunks.insert(key, c);
            }
            Some(have) if have.end() == c.start => have.absorb(&c)?,
            Some(have) if c.end() == have.start => {
                let mut merged = c;
                merged.absorb(have)?;
                *have = merged;
            }
            Some(have) => {
                return Err(Error::Checkpoint(format!(
                    "offset ranges {}..{} and {}..{} are not adjacent",
                    have.start,
                    have.end(),
                    c.start,
                    c.end()
                )))
            }
        }
        Ok(())
    }
}

/// Exact union of two states over disjoint offset ranges.
pub fn merge_states(a: &EstimatorState, b: &EstimatorState) -> Result<EstimatorState> {
    if a.config_hash != b.config_hash {
        return Err(Error::Checkpoint(format!("config hash {} does not match {}", a.config_hash, b.config_hash)));
    }
    let mut out = a.clone();
    for c in b.chunks.values() {
        out.insert(c.clone())?;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CheckpointChunk {
    chunk: u64,
    start: u64,
    points: u64,
    sums: Vec<String>,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: u32,
    config_hash: String,
    config: RunConfig,
    /// Halton index of the last point of the completed prefix (`skip` if none).
    last_completed_index: u64,
    chunks: Vec<CheckpointChunk>,
}

pub fn write_checkpoint(path: &Path, cfg: &RunConfig, state: &EstimatorState) -> Result<()> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT,
        config_hash: state.config_hash.clone(),
        config: cfg.clone(),
        last_completed_index: cfg.skip + state.completed_prefix(),
        chunks: state
            .chunks
            .iter()
            .map(|(&k, c)| CheckpointChunk {
                chunk: k,
                start: c.start,
                points: c.points,
                sums: c.sums.iter().map(|&v| fixed_to_hex(v)).collect(),
                counts: c.counts.clone(),
            })
            .collect(),
    };
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, &file)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Configuration stored in a checkpoint, for adopting its chunk size.
pub fn checkpoint_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    Ok(file.config)
}

/// Load a checkpoint written for a configuration with the same hash.
pub fn read_checkpoint(path: &Path, cfg: &RunConfig) -> Result<EstimatorState> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!("unsupported format {}", file.format)));
    }
    let want = cfg.config_hash();
    if file.config_hash != want || file.config.config_hash() != want {
        return Err(Error::Checkpoint(format!(
            "checkpoint config hash {} does not match run config hash {want}",
            file.config_hash
        )));
    }
    let mut state = EstimatorState::empty(cfg);
    for c in file.chunks {
        if c.sums.len() != cfg.run_type.sums() || c.counts.len() != cfg.run_type.counts() {
            return Err(Error::Checkpoint(format!("chunk {} has the wrong number of accumulators", c.chunk)));
        }
        if c.start / cfg.chunk_size != c.chunk {
            return Err(Error::Checkpoint(format!("chunk {} starts at offset {}", c.chunk, c.start)));
        }
        let sums = c.sums.iter().map(|s| fixed_from_hex(s)).collect::<Result<Vec<_>>>()?;
        state.insert(ChunkSums { start: c.start, points: c.points, sums, counts: c.counts })?;
    }
    let done = state.completed_prefix();
    if state.points() != done || file.last_completed_index != cfg.skip + done {
        return Err(Error::Checkpoint("accumulated ranges are not a completed prefix".into()));
    }
    if done > cfg.samples {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds {done} samples, more than the requested {}",
            cfg.samples
        )));
    }
    Ok(state)
}

/// Execution settings that never change a reported value.
#[derive(Debug, Clone, Default)]
pub struct RunControl {
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Continue from `checkpoint` if it exists.
    pub resume: bool,
    /// Stop once this many samples (counted from offset 0) are accumulated.
    pub stop_after: Option<u64>,
    /// Write one CSV row per sample of a volume run.
    pub dump: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: EstimateReport,
    pub state: EstimatorState,
    pub complete: bool,
}

/// Everything computed at one volume sample.
#[derive(Debug, Clone, Copy)]
pub struct VolumeSample {
    pub index: u64,
    pub spectrum: [f64; 4],
    pub weight: f64,
    pub verdict: Verdict,
    pub negativity: f64,
    pub concurrence: f64,
}

/// Evaluate one point of the 15-dimensional stream.
pub fn volume_sample(index: u64, x: &[f64], metric: MetricConvention) -> Result<VolumeSample> {
    let roles = RunType::Volume.roles();
    let mut u = [0.0; 12];
    u.copy_from_slice(&x[roles.unitary]);
    let mut v = [0.0; 3];
    v.copy_from_slice(&x[roles.angles]);
    let angles = EigenAngles::from_unit(v)?;
    let spectrum = state_space::spectrum_from_angles(angles).as_array();
    if spectrum.contains(&0.0) {
        return Err(Error::SingularWeight { index });
    }
    let weight = measures::chain_weight(&angles.as_array(), metric);
    if !weight.is_finite() {
        return Err(Error::SingularWeight { index });
    }
    let frame = state_space::unitary_from_coords(UnitaryCoords::new(u)?);
    let rho = linalg::conjugate_diag(frame.matrix(), &spectrum);
    let sqrt_rho = linalg::conjugate_diag(frame.matrix(), &spectrum.map(f64::sqrt));
    let pt = separability::partial_transpose_matrix(&rho);
    let verdict = Verdict::from_determinant(linalg::determinant(&pt).re);
    let negativity = separability::negativity_from_pt(&linalg::hermitian_eigenvalues(&pt));
    let concurrence = separability::concurrence_with_sqrt(&rho, &sqrt_rho)?;
    Ok(VolumeSample { index, spectrum, weight, verdict, negativity, concurrence })
}

/// Frame projectors of a 14-dimensional boundary point, pre-transposed.
#[derive(Debug, Clone)]
pub struct BoundaryLine {
    theta: [f64; 2],
    pt_projectors: [Mat4; 4],
}

impl BoundaryLine {
    /// `fixed` holds 12 frame coordinates and the unit-scaled `θ_1, θ_2`.
    pub fn new(fixed: &[f64]) -> Result<Self> {
        if fixed.len() != 14 {
            return Err(Error::Domain(format!("boundary point needs 14 coordinates, got {}", fixed.len())));
        }
        let mut u = [0.0; 12];
        u.copy_from_slice(&fixed[..12]);
        let frame = state_space::unitary_from_coords(UnitaryCoords::new(u)?);
        let mut pt_projectors = [linalg::zeros(); 4];
        for (k, p) in pt_projectors.iter_mut().enumerate() {
            let mut d = [0.0; 4];
            d[k] = 1.0;
            *p = separability::partial_transpose_matrix(&linalg::conjugate_diag(frame.matrix(), &d));
        }
        let theta = [fixed[12] * FRAC_PI_2, fixed[13] * FRAC_PI_2];
        EigenAngles::new([theta[0], theta[1], 0.0])?;
        Ok(Self { theta, pt_projectors })
    }

    pub fn angles(&self, t: f64) -> [f64; 3] {
        [self.theta[0], self.theta[1], t * FRAC_PI_2]
    }

    /// `det ρ^{T_B}` along the line `θ_3 = t·π/2`.
    pub fn g(&self, t: f64) -> f64 {
        let l = measures::chain_spectrum(&self.angles(t));
        let mut m = linalg::zeros();
        for (p, &lk) in self.pt_projectors.iter().zip(&l) {
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] += p[i][j] * lk;
                }
            }
        }
        linalg::determinant(&m).re
    }

    /// Sign changes of `g` on a uniform grid, each refined by bisection.
    /// Also returns the number of grid nodes where `g` is exactly zero.
    pub fn roots(&self, cells: usize) -> (Vec<f64>, u64) {
        let mut roots = Vec::new();
        let mut zeros = 0;
        let mut t0 = 0.0;
        let mut g0 = self.g(t0);
        for j in 1..=cells {
            let t1 = j as f64 / cells as f64;
            let g1 = self.g(t1);
            if g1 == 0.0 {
                zeros += 1;
            }
            if (g0 < 0.0) != (g1 < 0.0) {
                roots.push(self.bisect(t0, t1, g0 < 0.0));
            }
            t0 = t1;
            g0 = g1;
        }
        (roots, zeros)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, lo_negative: bool) -> f64 {
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            if (self.g(mid) < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// All `t` in `(0,1)` where the partial-transpose determinant changes sign
/// along `θ_3 = t·π/2`, using the default 64-cell scan.
pub fn find_boundary_roots(fixed: &[f64]) -> Result<Vec<f64>> {
    Ok(BoundaryLine::new(fixed)?.roots(DEFAULT_GRID_CELLS).0)
}

struct Engine {
    cfg: RunConfig,
    stream: HaltonStream,
}

impl Engine {
    fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let stream = HaltonStream::with_scramble(cfg.scramble, cfg.run_type.dimension())?;
        Ok(Self { cfg: cfg.clone(), stream })
    }

    fn chunk(&self, lo: u64, hi: u64, dump: bool) -> Result<(ChunkSums, String)> {
        let rt = self.cfg.run_type;
        let mut acc = ChunkSums::empty(rt, lo);
        let mut rows = String::new();
        let mut x = vec![0.0; rt.dimension()];
        for off in lo..hi {
            let index = self.cfg.skip + 1 + off;
            self.stream.fill(index, &mut x)?;
            match rt {
                RunType::Volume => {
                    let s = volume_sample(index, &x, self.cfg.metric)?;
                    let sep = s.verdict.is_separable();
                    // exact power-of-two rescaling to the Bures element
                    let w = s.weight / metric_scale(self.cfg.metric);
                    let add = [w, if sep { w } else { 0.0 }, w * s.negativity, w * s.concurrence];
                    for (a, v) in acc.sums.iter_mut().zip(add) {
                        *a = a.checked_add(to_fixed(v)?).ok_or(Error::Overflow)?;
                    }
                    acc.counts[0] += u64::from(sep);
                    acc.counts[1] += u64::from(!sep);
                    acc.counts[2] += u64::from(s.verdict == Verdict::Boundary);
                    if dump {
                        dump_row(&mut rows, &x, &s);
                    }
                }
                RunType::BoundarySeparable => {
                    let line = BoundaryLine::new(&x)?;
                    let (roots, zeros) = line.roots(self.cfg.grid_cells);
                    let mut contribution = 0.0;
                    for &t in &roots {
                        let w = measures::chain_weight(&line.angles(t), MetricConvention::Bures);
                        if !w.is_finite() {
                            return Err(Error::SingularWeight { index });
                        }
                        contribution += w / PI;
                    }
                    acc.sums[0] = acc.sums[0].checked_add(to_fixed(contribution)?).ok_or(Error::Overflow)?;
                    acc.counts[0] += u64::from(!roots.is_empty());
                    acc.counts[1] += roots.len() as u64;
                    acc.counts[2] += zeros;
                }
            }
            acc.points += 1;
        }
        Ok((acc, rows))
    }
}

/// Ratio of the conditional element in `metric` to the Bures one (a power of two).
fn metric_scale(metric: MetricConvention) -> f64 {
    ipow(metric.pair_factor(), 6)
}

pub const DUMP_HEADER: &str = "index,u1,u2,u3,u4,u5,u6,u7,u8,u9,u10,u11,u12,v1,v2,v3,\
lambda1,lambda2,lambda3,lambda4,weight,separable,negativity,concurrence";

fn dump_row(out: &mut String, x: &[f64], s: &VolumeSample) {
    use std::fmt::Write as _;
    let _ = write!(out, "{}", s.index);
    for &v in x.iter().chain(&s.spectrum).chain(std::iter::once(&s.weight)) {
        let _ = write!(out, ",{}", sig17(v));
    }
    let _ = writeln!(
        out,
        ",{},{},{}",
        u8::from(s.verdict.is_separable()),
        sig17(s.negativity),
        sig17(s.concurrence)
    );
}

/// Run a volume or boundary-separable estimate.
pub fn execute(cfg: &RunConfig, ctl: &RunControl) -> Result<RunOutcome> {
    let started = Instant::now();
    let engine = Engine::new(cfg)?;
    if ctl.dump.is_some() && cfg.run_type != RunType::Volume {
        return Err(Error::Config("sample dumps are only produced by volume runs".into()));
    }
    let mut dump = match &ctl.dump {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "{DUMP_HEADER}")?;
            Some(w)
        }
        None => None,
    };
    let mut state = match (&ctl.checkpoint, ctl.resume) {
        (Some(p), true) if p.exists() => read_checkpoint(p, cfg)?,
        (None, true) => return Err(Error::Config("resume needs a checkpoint path".into())),
        _ => EstimatorState::empty(cfg),
    };
    let target = ctl.stop_after.map_or(cfg.samples, |s| s.min(cfg.samples));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctl.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let wave = (pool.current_num_threads() as u64 * 4).max(1);
    let mut done = state.completed_prefix();
    while done < target {
        let first = done / cfg.chunk_size;
        let last = (target - 1) / cfg.chunk_size;
        let pieces: Vec<(u64, u64)> = (first..=last.min(first + wave - 1))
            .map(|k| (cfg.chunk_size * k).max(done)..(cfg.chunk_size * (k + 1)).min(target))
            .map(|r| (r.start, r.end))
            .collect();
        let want_rows = dump.is_some();
        let results: Vec<(ChunkSums, String)> =
            pool.install(|| pieces.par_iter().map(|&(lo, hi)| engine.chunk(lo, hi, want_rows)).collect::<Result<_>>())?;
        for (sums, rows) in results {
            done = sums.end();
            state.insert(sums)?;
            if let Some(w) = dump.as_mut() {
                w.write_all(rows.as_bytes())?;
            }
        }
        if let Some(p) = &ctl.checkpoint {
            write_checkpoint(p, cfg, &state)?;
        }
    }
    if let Some(mut w) = dump {
        w.flush()?;
    }
    let complete = state.points() == cfg.samples;
    let mut report = build_report(cfg, &state)?;
    report.wall_time_s = Sig17(started.elapsed().as_secs_f64());
    Ok(RunOutcome { report, state, complete })
}

/// Exact totals over chunk keys `range`.
fn totals(state: &EstimatorState, range: std::ops::Range<u64>) -> ChunkSums {
    let mut t = ChunkSums::empty(state.run_type, 0);
    for c in state.chunks.range(range).map(|(_, c)| c) {
        // sums of in-range accumulators cannot overflow beyond what insertion checked
        for (a, b) in t.sums.iter_mut().zip(&c.sums) {
            *a = a.saturating_add(*b);
        }
        for (a, b) in t.counts.iter_mut().zip(&c.counts) {
            *a += b;
        }
        t.points += c.points;
    }
    t
}

/// Standard deviation of batch values over `√B`.
fn batch_se(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Report from accumulated state. Batches split the accumulated chunks into
/// `cfg.batches` consecutive groups.
pub fn build_report(cfg: &RunConfig, state: &EstimatorState) -> Result<EstimateReport> {
    if state.config_hash != cfg.config_hash() {
        return Err(Error::Checkpoint("state does not belong to this configuration".into()));
    }
    let chunks = state.chunks.keys().next_back().map_or(0, |k| k + 1);
    let b = u64::from(cfg.batches);
    let all = totals(state, 0..chunks);
    let groups: Vec<ChunkSums> = if chunks >= b {
        (0..b).map(|i| totals(state, i * chunks / b..(i + 1) * chunks / b)).collect()
    } else {
        Vec::new()
    };
    let frame = constants::haar_volume(4).expect("m = 4 frame volume");
    let box_factor = ipow(FRAC_PI_2, 3) * frame * metric_scale(cfg.metric);

    struct Stat<'a> {
        name: &'a str,
        f: Box<dyn Fn(&ChunkSums) -> f64 + 'a>,
    }
    let per_point = move |k: usize| move |c: &ChunkSums| box_factor * from_fixed(c.sums[k]) / c.points as f64;
    let ratio = |k: usize| move |c: &ChunkSums| from_fixed(c.sums[k]) / from_fixed(c.sums[0]);
    let fraction = |k: usize| move |c: &ChunkSums| c.counts[k] as f64 / c.points as f64;
    let stats: Vec<Stat> = match cfg.run_type {
        RunType::Volume => vec![
            Stat { name: "V_total", f: Box::new(per_point(0)) },
            Stat { name: "V_sep", f: Box::new(per_point(1)) },
            Stat { name: "P_sep", f: Box::new(ratio(1)) },
            Stat { name: "mean_negativity", f: Box::new(ratio(2)) },
            Stat { name: "mean_concurrence", f: Box::new(ratio(3)) },
        ],
        RunType::BoundarySeparable => vec![
            Stat { name: "A_sep", f: Box::new(per_point(0)) },
            Stat { name: "root_fraction", f: Box::new(fraction(0)) },
            Stat { name: "mean_root_count", f: Box::new(fraction(1)) },
        ],
    };
    let mut estimates = BTreeMap::new();
    if all.points > 0 {
        for s in &stats {
            let se = if groups.is_empty() {
                f64::NAN
            } else {
                batch_se(&groups.iter().map(|g| (s.f)(g)).collect::<Vec<_>>())
            };
            estimates.insert(s.name.to_string(), Estimate::with_se((s.f)(&all), se));
        }
    }
    let mut counts = BTreeMap::new();
    counts.insert("points".to_string(), all.points);
    let names: &[&str] = match cfg.run_type {
        RunType::Volume => &VOLUME_COUNTS,
        RunType::BoundarySeparable => &BOUNDARY_COUNTS,
    };
    for (name, &c) in names.iter().zip(&all.counts) {
        counts.insert(name.to_string(), c);
    }
    let mut report = EstimateReport {
        run_type: cfg.run_type.name().to_string(),
        config: cfg.echo(),
        estimates,
        reference: BTreeMap::new(),
        counts,
        wall_time_s: Sig17(0.0),
    };
    let refv = |name: &str| lookup(name).expect("reference constant").decimal;
    match cfg.run_type {
        RunType::Volume => {
            report.add_reference("P_sep", "P_sep_conjecture", refv("P_sep_conjecture"));
            if cfg.metric == MetricConvention::Sd {
                report.add_reference("V_total", "V_total", refv("V_total"));
                report.add_reference("V_sep", "V_sep_conjecture", refv("V_sep_conjecture"));
            }
        }
        RunType::BoundarySeparable => {
            if cfg.metric == MetricConvention::Sd {
                report.add_reference("A_sep", "A_sep_candidate_175", refv("A_sep_candidate_175"));
                report.add_reference("A_sep", "A_sep_candidate_548", refv("A_sep_candidate_548"));
            }
        }
    }
    Ok(report)
}

/// Volume run with default execution settings.
pub fn volume_run(cfg: &RunConfig) -> Result<EstimateReport> {
    if cfg.run_type != RunType::Volume {
        return Err(Error::Config("volume_run needs a volume configuration".into()));
    }
    Ok(execute(cfg, &RunControl::default())?.report)
}

pub fn separable_boundary_run(cfg: &RunConfig) -> Result<EstimateReport> {
    if cfg.run_type != RunType::BoundarySeparable {
        return Err(Error::Config("separable_boundary_run needs a boundary configuration".into()));
    }
    Ok(execute(cfg, &RunControl::default())?.report)
}

/// `A_total = 4 × (boundary-restricted integral) × π⁶/96`, by quadrature.
pub fn total_boundary_area(metric: MetricConvention) -> Result<EstimateReport> {
    let started = Instant::now();
    let q = measures::boundary_restricted_integral(4, metric)?;
    let frame = constants::haar_volume(4).expect("m = 4 frame volume");
    let area = 4.0 * q.value * frame;
    let mut estimates = BTreeMap::new();
    estimates.insert("boundary_integral".to_string(), Estimate::quadrature(q.value, q.error));
    estimates.insert("A_total".to_string(), Estimate::quadrature(area, 4.0 * q.error * frame));
    let mut counts = BTreeMap::new();
    counts.insert("evaluations".to_string(), q.evaluations);
    counts.insert("multiplicity".to_string(), 4);
    let mut report = EstimateReport {
        run_type: "boundary-total".to_string(),
        config: serde_json::json!({ "metric": metric, "levels": 4 }),
        estimates,
        reference: BTreeMap::new(),
        counts,
        wall_time_s: Sig17(0.0),
    };
    if metric == MetricConvention::Sd {
        report.add_reference("A_total", "A_total", lookup("A_total").expect("A_total").decimal);
        report.add_reference(
            "boundary_integral",
            "boundary_integral_m4",
            lookup("boundary_integral_m4").expect("boundary integral").decimal,
        );
    }
    report.wall_time_s = Sig17(started.elapsed().as_secs_f64());
    Ok(report)
}
