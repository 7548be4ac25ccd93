//! JSON scheme files.
//!
//! ```json
//! {"kind": "rank_one_povm_tuple", "n": 2, "k": 3, "m": 2, "effects": [[M, M], …], "seed": 1}
//! {"kind": "observables", "n": 4, "k": 2, "m": 11, "dims": [2, 2], "factors": [[A, B], …]}
//! ```
//!
//! Matrices are nested arrays of `[re, im]` pairs. For observables `k` counts tensor
//! factors and `m` counts observables. Frames (`"kind": "frame"`) store their vectors as
//! the rows of an `m × n` matrix in `vectors`, with `k = 1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, HermitianMatrix, RealMatrix};

use super::{Frame, Measurement, MeasurementScheme, ObservableScheme, Povm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    RankOnePovmTuple,
    Observables,
    Frame,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeFile {
    pub kind: SchemeKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<Vec<ComplexMatrix>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<ComplexMatrix>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A scheme read from disk.
#[derive(Clone, Debug)]
pub enum AnyScheme {
    Povms(MeasurementScheme),
    Observables(ObservableScheme),
    Frame(Frame),
}

impl Measurement for AnyScheme {
    fn hilbert_dim(&self) -> usize {
        match self {
            AnyScheme::Povms(s) => s.hilbert_dim(),
            AnyScheme::Observables(s) => s.hilbert_dim(),
            AnyScheme::Frame(s) => s.hilbert_dim(),
        }
    }

    fn hmatrix(&self) -> &RealMatrix {
        match self {
            AnyScheme::Povms(s) => s.hmatrix(),
            AnyScheme::Observables(s) => s.hmatrix(),
            AnyScheme::Frame(s) => s.hmatrix(),
        }
    }
}

impl SchemeFile {
    pub fn from_povm_scheme(s: &MeasurementScheme, seed: Option<u64>) -> Self {
        let effects: Vec<Vec<ComplexMatrix>> =
            s.povms().iter().map(|p| p.effects().iter().map(|e| e.as_matrix().clone()).collect()).collect();
        SchemeFile {
            kind: SchemeKind::RankOnePovmTuple,
            n: s.hilbert_dim(),
            k: s.num_povms(),
            m: s.outcomes_per_povm().unwrap_or(0),
            dims: None,
            effects: Some(effects),
            factors: None,
            pauli: None,
            vectors: None,
            seed,
        }
    }

    pub fn from_frame(f: &Frame, seed: Option<u64>) -> Self {
        let rows = ComplexMatrix::from_fn(f.len(), f.dim(), |i, j| f.vectors()[i][j]);
        SchemeFile {
            kind: SchemeKind::Frame,
            n: f.dim(),
            k: 1,
            m: f.len(),
            dims: None,
            effects: None,
            factors: None,
            pauli: None,
            vectors: Some(rows),
            seed,
        }
    }

    pub fn from_any(s: &AnyScheme, seed: Option<u64>) -> Self {
        match s {
            AnyScheme::Povms(s) => Self::from_povm_scheme(s, seed),
            AnyScheme::Observables(s) => Self::from_observables(s, seed),
            AnyScheme::Frame(f) => Self::from_frame(f, seed),
        }
    }

    pub fn from_observables(s: &ObservableScheme, seed: Option<u64>) -> Self {
        let factors = s.observables().iter().map(|f| f.iter().map(|o| o.as_matrix().clone()).collect()).collect();
        SchemeFile {
            kind: SchemeKind::Observables,
            n: s.hilbert_dim(),
            k: s.dims().len(),
            m: s.len(),
            dims: Some(s.dims().to_vec()),
            effects: None,
            factors: Some(factors),
            pauli: Some(s.pauli_mode()),
            vectors: None,
            seed,
        }
    }

    /// Validates the header against the payload and builds the scheme.
    pub fn into_scheme(self) -> Result<AnyScheme> {
        match self.kind {
            SchemeKind::RankOnePovmTuple => {
                let effects = self.effects.ok_or_else(|| Error::Format("missing field `effects`".into()))?;
                if effects.len() != self.k {
                    return Err(Error::Format(format!("`k` is {} but `effects` has {} POVMs", self.k, effects.len())));
                }
                let mut povms = Vec::with_capacity(effects.len());
                for (i, p) in effects.into_iter().enumerate() {
                    if self.m != 0 && p.len() != self.m {
                        return Err(Error::Format(format!("effects[{i}] has {} outcomes, `m` is {}", p.len(), self.m)));
                    }
                    let hs = p
                        .into_iter()
                        .enumerate()
                        .map(|(j, e)| {
                            if e.rows() != self.n {
                                return Err(Error::Format(format!(
                                    "effects[{i}][{j}] is {}x{}, `n` is {}",
                                    e.rows(),
                                    e.cols(),
                                    self.n
                                )));
                            }
                            HermitianMatrix::new(e).map_err(|err| Error::Format(format!("effects[{i}][{j}]: {err}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    povms.push(Povm::new(hs).map_err(|err| Error::Format(format!("effects[{i}]: {err}")))?);
                }
                Ok(AnyScheme::Povms(MeasurementScheme::new(povms)?))
            }
            SchemeKind::Observables => {
                let dims = self.dims.ok_or_else(|| Error::Format("missing field `dims`".into()))?;
                let factors = self.factors.ok_or_else(|| Error::Format("missing field `factors`".into()))?;
                if dims.iter().product::<usize>() != self.n {
                    return Err(Error::Format(format!("product of `dims` {dims:?} is not `n` = {}", self.n)));
                }
                if factors.len() != self.m {
                    return Err(Error::Format(format!(
                        "`m` is {} but `factors` has {} entries",
                        self.m,
                        factors.len()
                    )));
                }
                let obs = factors
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| {
                        f.into_iter()
                            .enumerate()
                            .map(|(j, o)| {
                                HermitianMatrix::new(o)
                                    .map_err(|err| Error::Format(format!("factors[{i}][{j}]: {err}")))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let s = ObservableScheme::new(dims, obs, self.pauli.unwrap_or(false))
                    .map_err(|err| Error::Format(err.to_string()))?;
                Ok(AnyScheme::Observables(s))
            }
            SchemeKind::Frame => {
                let v = self.vectors.ok_or_else(|| Error::Format("missing field `vectors`".into()))?;
                if v.rows() != self.m || v.cols() != self.n {
                    return Err(Error::Format(format!(
                        "`vectors` is {}x{}, expected m x n = {}x{}",
                        v.rows(),
                        v.cols(),
                        self.m,
                        self.n
                    )));
                }
                let rows = (0..v.rows()).map(|i| v.row(i).to_vec()).collect();
                Ok(AnyScheme::Frame(Frame::new(rows).map_err(|err| Error::Format(format!("vectors: {err}")))?))
            }
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{qubit_mub_scheme, sample_local_observables};
    use crate::seed::rng_from_seed;

    #[test]
    fn povm_file_round_trip_preserves_hmatrix() {
        let s = qubit_mub_scheme();
        let file = SchemeFile::from_povm_scheme(&s, Some(5));
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"kind\":\"rank_one_povm_tuple\""));
        let back: SchemeFile = serde_json::from_str(&text).unwrap();
        let loaded = back.into_scheme().unwrap();
        assert!(loaded.hmatrix().sub(s.hmatrix()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn frame_file_round_trip() {
        let f = crate::schemes::sample_gaussian_frame(3, 5, &mut rng_from_seed(9)).unwrap();
        let text = serde_json::to_string(&SchemeFile::from_frame(&f, Some(9))).unwrap();
        let loaded = serde_json::from_str::<SchemeFile>(&text).unwrap().into_scheme().unwrap();
        assert!(matches!(loaded, AnyScheme::Frame(_)));
        assert!(loaded.hmatrix().sub(f.hmatrix()).unwrap().max_abs() < 1e-15);
        let mut bad: SchemeFile = serde_json::from_str(&text).unwrap();
        bad.m = 4;
        assert!(matches!(bad.into_scheme(), Err(Error::Format(_))));
    }

    #[test]
    fn observable_file_round_trip() {
        let s = sample_local_observables(&[2, 2], 3, true, &mut rng_from_seed(8)).unwrap();
        let text = serde_json::to_string(&SchemeFile::from_observables(&s, None)).unwrap();
        let loaded = serde_json::from_str::<SchemeFile>(&text).unwrap().into_scheme().unwrap();
        assert!(matches!(loaded, AnyScheme::Observables(_)));
        assert!(loaded.hmatrix().sub(s.hmatrix()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn mismatched_header_is_reported() {
        let mut file = SchemeFile::from_povm_scheme(&qubit_mub_scheme(), None);
        file.k = 2;
        let err = file.into_scheme().unwrap_err().to_string();
        assert!(err.contains("`k` is 2"), "{err}");
    }

    #[test]
    fn non_povm_effects_are_rejected() {
        let mut file = SchemeFile::from_povm_scheme(&qubit_mub_scheme(), None);
        file.effects.as_mut().unwrap()[0][0] = ComplexMatrix::identity(2);
        assert!(matches!(file.into_scheme(), Err(Error::Format(_))));
    }
}
