//! Process specifications: transfer functions and innovation correlation
//! models, with a JSON form for piecewise-constant tables.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::QuadratureMirrorPair;

/// Level selector: a detail scale `1..=J` or the final smooth level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Detail(usize),
    Smooth,
}

type MatrixFn = Arc<dyn Fn(usize, f64) -> DMatrix<f64> + Send + Sync>;

/// Transfer function model `V_j(u)`, lower-triangular `P x P` per scale.
#[derive(Clone)]
pub enum TransferModel {
    /// Piecewise-constant in rescaled time; serializable.
    Piecewise {
        /// Ascending, starting at 0.0; segment `s` covers
        /// `[breakpoints[s], breakpoints[s+1])`, the last up to 1.0.
        breakpoints: Vec<f64>,
        /// `detail[segment][j-1]`.
        detail: Vec<Vec<DMatrix<f64>>>,
        /// Optional smooth-level transfer per segment.
        smooth: Option<Vec<DMatrix<f64>>>,
    },
    /// Arbitrary smooth transfer for the detail scales (test designs).
    Callable {
        detail: MatrixFn,
        smooth: Option<MatrixFn>,
    },
}

impl std::fmt::Debug for TransferModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransferModel::Piecewise { breakpoints, .. } => f
                .debug_struct("Piecewise")
                .field("breakpoints", breakpoints)
                .finish_non_exhaustive(),
            TransferModel::Callable { .. } => f.write_str("Callable(..)"),
        }
    }
}

pub(crate) fn segment_index(breakpoints: &[f64], u: f64) -> usize {
    let mut seg = 0;
    for (i, b) in breakpoints.iter().enumerate() {
        if u >= *b {
            seg = i;
        }
    }
    seg
}

impl TransferModel {
    /// Constant-in-time transfer for the detail scales.
    pub fn constant(detail: Vec<DMatrix<f64>>, smooth: Option<DMatrix<f64>>) -> Self {
        TransferModel::Piecewise {
            breakpoints: vec![0.0],
            detail: vec![detail],
            smooth: smooth.map(|m| vec![m]),
        }
    }

    pub fn eval(&self, level: Level, u: f64) -> DMatrix<f64> {
        match self {
            TransferModel::Piecewise {
                breakpoints,
                detail,
                smooth,
            } => {
                let seg = segment_index(breakpoints, u);
                match level {
                    Level::Detail(j) => detail[seg][j - 1].clone(),
                    Level::Smooth => smooth
                        .as_ref()
                        .map(|s| s[seg].clone())
                        .expect("smooth transfer requested but not specified"),
                }
            }
            TransferModel::Callable { detail, smooth } => match level {
                Level::Detail(j) => detail(j, u),
                Level::Smooth => smooth
                    .as_ref()
                    .map(|s| s(0, u))
                    .expect("smooth transfer requested but not specified"),
            },
        }
    }

    fn has_smooth(&self) -> bool {
        match self {
            TransferModel::Piecewise { smooth, .. } => smooth.is_some(),
            TransferModel::Callable { smooth, .. } => smooth.is_some(),
        }
    }
}

type CorrFn = Arc<dyn Fn(usize, usize, f64) -> DMatrix<f64> + Send + Sync>;

/// Innovation correlation model `Q_{jj'}(u)` for detail scale pairs
/// `j < j'`; within a scale the correlation is always the identity.
#[derive(Clone)]
pub enum CorrModel {
    /// Innovations uncorrelated across scales (the classical assumption).
    Independent,
    /// Piecewise-constant cross-scale blocks; unlisted pairs are zero.
    Piecewise {
        breakpoints: Vec<f64>,
        /// `blocks[segment]` maps `(j, j')` with `j < j'` to a `P x P` block.
        blocks: Vec<Vec<(usize, usize, DMatrix<f64>)>>,
    },
    /// Arbitrary cross-scale correlation, queried with `j < j'`.
    Callable(CorrFn),
}

impl std::fmt::Debug for CorrModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrModel::Independent => f.write_str("Independent"),
            CorrModel::Piecewise { breakpoints, .. } => f
                .debug_struct("Piecewise")
                .field("breakpoints", breakpoints)
                .finish_non_exhaustive(),
            CorrModel::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

impl CorrModel {
    /// Constant cross-scale blocks.
    pub fn constant(blocks: Vec<(usize, usize, DMatrix<f64>)>) -> Self {
        CorrModel::Piecewise {
            breakpoints: vec![0.0],
            blocks: vec![blocks],
        }
    }

    /// `Q_{jj'}(u)` for `j != j'`; transposes stored `j < j'` blocks.
    pub fn eval(&self, j: usize, jp: usize, u: f64, channels: usize) -> DMatrix<f64> {
        debug_assert_ne!(j, jp);
        let (a, b, transpose) = if j < jp {
            (j, jp, false)
        } else {
            (jp, j, true)
        };
        let block = match self {
            CorrModel::Independent => DMatrix::zeros(channels, channels),
            CorrModel::Piecewise {
                breakpoints,
                blocks,
            } => {
                let seg = segment_index(breakpoints, u);
                blocks[seg]
                    .iter()
                    .find(|(bj, bjp, _)| *bj == a && *bjp == b)
                    .map(|(_, _, m)| m.clone())
                    .unwrap_or_else(|| DMatrix::zeros(channels, channels))
            }
            CorrModel::Callable(f) => f(a, b, u),
        };
        if transpose {
            block.transpose()
        } else {
            block
        }
    }

    pub fn is_independent(&self) -> bool {
        matches!(self, CorrModel::Independent)
    }
}

/// Full MvLSW process specification with cross-scale dependence.
#[derive(Debug, Clone)]
pub struct MvLswSpec {
    channels: usize,
    levels: usize,
    filter: QuadratureMirrorPair,
    include_smooth: bool,
    transfer: TransferModel,
    innovation: CorrModel,
    sampling_rate: f64,
}

impl MvLswSpec {
    pub fn new(
        channels: usize,
        levels: usize,
        filter: QuadratureMirrorPair,
        transfer: TransferModel,
        innovation: CorrModel,
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidSpec("channels must be at least 1".into()));
        }
        if levels == 0 {
            return Err(Error::InvalidSpec("levels must be at least 1".into()));
        }
        let include_smooth = transfer.has_smooth();
        let spec = Self {
            channels,
            levels,
            filter,
            include_smooth,
            transfer,
            innovation,
            sampling_rate: 1.0,
        };
        spec.validate_structure()?;
        Ok(spec)
    }

    pub fn with_sampling_rate(mut self, rate: f64) -> Self {
        self.sampling_rate = rate;
        self
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn filter(&self) -> &QuadratureMirrorPair {
        &self.filter
    }

    pub fn include_smooth(&self) -> bool {
        self.include_smooth
    }

    pub fn transfer(&self) -> &TransferModel {
        &self.transfer
    }

    pub fn innovation(&self) -> &CorrModel {
        &self.innovation
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    /// `V` evaluated at `(level, u)`, checked lower-triangular.
    pub fn transfer_at(&self, level: Level, u: f64) -> Result<DMatrix<f64>> {
        let m = self.transfer.eval(level, u);
        if m.nrows() != self.channels || m.ncols() != self.channels {
            return Err(Error::InvalidSpec(format!(
                "transfer matrix at u={u} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.channels,
                self.channels
            )));
        }
        for r in 0..m.nrows() {
            for c in (r + 1)..m.ncols() {
                if m[(r, c)] != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "transfer matrix at u={u} is not lower-triangular (entry ({r},{c}))"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// `Q_{jj'}(u)`: identity on the diagonal, entrywise bounded by one.
    pub fn innovation_at(&self, j: usize, jp: usize, u: f64) -> Result<DMatrix<f64>> {
        if j == jp {
            return Ok(DMatrix::identity(self.channels, self.channels));
        }
        let m = self.innovation.eval(j, jp, u, self.channels);
        if m.nrows() != self.channels || m.ncols() != self.channels {
            return Err(Error::InvalidSpec(format!(
                "innovation block ({j},{jp}) at u={u} has wrong dimensions"
            )));
        }
        if m.iter().any(|v| v.abs() > 1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "innovation block ({j},{jp}) at u={u} has an entry with modulus above one"
            )));
        }
        Ok(m)
    }

    /// Structural checks on a probe grid (exact for piecewise models).
    fn validate_structure(&self) -> Result<()> {
        let probes: Vec<f64> = match &self.transfer {
            TransferModel::Piecewise { breakpoints, .. } => {
                validate_breakpoints(breakpoints)?;
                breakpoints.clone()
            }
            TransferModel::Callable { .. } => (0..16).map(|i| i as f64 / 16.0).collect(),
        };
        for &u in &probes {
            for j in 1..=self.levels {
                self.transfer_at(Level::Detail(j), u)?;
            }
            if self.include_smooth {
                self.transfer_at(Level::Smooth, u)?;
            }
        }
        if let CorrModel::Piecewise {
            breakpoints,
            blocks,
        } = &self.innovation
        {
            validate_breakpoints(breakpoints)?;
            for (seg, segment) in blocks.iter().enumerate() {
                for (j, jp, m) in segment {
                    if !(1..=self.levels).contains(j)
                        || !(1..=self.levels).contains(jp)
                        || j >= jp
                    {
                        return Err(Error::InvalidSpec(format!(
                            "innovation block ({j},{jp}) in segment {seg} must have 1 <= j < j' <= {}",
                            self.levels
                        )));
                    }
                    if m.nrows() != self.channels || m.ncols() != self.channels {
                        return Err(Error::InvalidSpec(format!(
                            "innovation block ({j},{jp}) in segment {seg} has wrong dimensions"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.first() != Some(&0.0) {
        return Err(Error::InvalidSpec(
            "breakpoints must start at 0.0".into(),
        ));
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "breakpoints must be strictly ascending".into(),
        ));
    }
    if breakpoints.iter().any(|b| *b < 0.0 || *b >= 1.0) {
        return Err(Error::InvalidSpec(
            "breakpoints must lie in [0, 1)".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// JSON form (piecewise-constant tables only).
// ---------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TransferSegmentFile {
    detail: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    smooth: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TransferFile {
    breakpoints: Vec<f64>,
    segments: Vec<TransferSegmentFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorrBlockFile {
    j: usize,
    j_prime: usize,
    matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorrSegmentFile {
    blocks: Vec<CorrBlockFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorrFile {
    breakpoints: Vec<f64>,
    segments: Vec<CorrSegmentFile>,
}

/// On-disk form of a piecewise-constant [`MvLswSpec`].
#[derive(Debug, Serialize, Deserialize)]
pub struct MvLswSpecFile {
    pub channels: usize,
    pub levels: usize,
    pub wavelet: String,
    #[serde(default = "default_rate")]
    pub sampling_rate: f64,
    transfer: TransferFile,
    #[serde(default)]
    innovation: Option<CorrFile>,
}

fn default_rate() -> f64 {
    1.0
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map(|r| r.len()).unwrap_or(0);
    if nr == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidSpec("ragged or empty matrix".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

impl MvLswSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MvLswSpecFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        file.try_into()
    }

    /// JSON form; only piecewise-constant models are serializable.
    pub fn to_json(&self) -> Result<String> {
        let file: MvLswSpecFile = self.try_into()?;
        serde_json::to_string_pretty(&file).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

impl TryFrom<MvLswSpecFile> for MvLswSpec {
    type Error = Error;

    fn try_from(file: MvLswSpecFile) -> Result<Self> {
        if file.transfer.segments.len() != file.transfer.breakpoints.len() {
            return Err(Error::InvalidSpec(
                "transfer needs one segment per breakpoint".into(),
            ));
        }
        let mut detail = Vec::new();
        let mut smooth: Option<Vec<DMatrix<f64>>> = None;
        for seg in &file.transfer.segments {
            if seg.detail.len() != file.levels {
                return Err(Error::InvalidSpec(format!(
                    "each transfer segment needs {} detail matrices",
                    file.levels
                )));
            }
            detail.push(
                seg.detail
                    .iter()
                    .map(|rows| rows_to_matrix(rows))
                    .collect::<Result<Vec<_>>>()?,
            );
            match (&mut smooth, &seg.smooth) {
                (s @ None, Some(rows)) if detail.len() == 1 => {
                    *s = Some(vec![rows_to_matrix(rows)?])
                }
                (Some(list), Some(rows)) => list.push(rows_to_matrix(rows)?),
                (None, None) => {}
                _ => {
                    return Err(Error::InvalidSpec(
                        "smooth transfer must appear in all segments or none".into(),
                    ))
                }
            }
        }
        let transfer = TransferModel::Piecewise {
            breakpoints: file.transfer.breakpoints.clone(),
            detail,
            smooth,
        };
        let innovation = match &file.innovation {
            None => CorrModel::Independent,
            Some(corr) => {
                if corr.segments.len() != corr.breakpoints.len() {
                    return Err(Error::InvalidSpec(
                        "innovation needs one segment per breakpoint".into(),
                    ));
                }
                let blocks = corr
                    .segments
                    .iter()
                    .map(|seg| {
                        seg.blocks
                            .iter()
                            .map(|b| Ok((b.j, b.j_prime, rows_to_matrix(&b.matrix)?)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                CorrModel::Piecewise {
                    breakpoints: corr.breakpoints.clone(),
                    blocks,
                }
            }
        };
        let filter = QuadratureMirrorPair::from_name(&file.wavelet)?;
        MvLswSpec::new(file.channels, file.levels, filter, transfer, innovation)
            .map(|s| s.with_sampling_rate(file.sampling_rate))
    }
}

impl TryFrom<&MvLswSpec> for MvLswSpecFile {
    type Error = Error;

    fn try_from(spec: &MvLswSpec) -> Result<Self> {
        let transfer = match &spec.transfer {
            TransferModel::Piecewise {
                breakpoints,
                detail,
                smooth,
            } => TransferFile {
                breakpoints: breakpoints.clone(),
                segments: detail
                    .iter()
                    .enumerate()
                    .map(|(s, mats)| TransferSegmentFile {
                        detail: mats.iter().map(matrix_to_rows).collect(),
                        smooth: smooth.as_ref().map(|sm| matrix_to_rows(&sm[s])),
                    })
                    .collect(),
            },
            TransferModel::Callable { .. } => {
                return Err(Error::InvalidSpec(
                    "callable transfer models are not serializable".into(),
                ))
            }
        };
        let innovation = match &spec.innovation {
            CorrModel::Independent => None,
            CorrModel::Piecewise {
                breakpoints,
                blocks,
            } => Some(CorrFile {
                breakpoints: breakpoints.clone(),
                segments: blocks
                    .iter()
                    .map(|seg| CorrSegmentFile {
                        blocks: seg
                            .iter()
                            .map(|(j, jp, m)| CorrBlockFile {
                                j: *j,
                                j_prime: *jp,
                                matrix: matrix_to_rows(m),
                            })
                            .collect(),
                    })
                    .collect(),
            }),
            CorrModel::Callable(_) => {
                return Err(Error::InvalidSpec(
                    "callable innovation models are not serializable".into(),
                ))
            }
        };
        Ok(MvLswSpecFile {
            channels: spec.channels,
            levels: spec.levels,
            wavelet: spec.filter.family_label().to_string(),
            sampling_rate: spec.sampling_rate,
            transfer,
            innovation,
        })
    }
}
