//! JSON encodings of matrices, games, instruments, POVMs and transcripts.
//!
//! Complex entries are `[re, im]` pairs in row-major order. Every matrix
//! carries the dimensions of its tensor factors, left factor most
//! significant.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use viqds_core::adversaries::{Instrument, Povm};
use viqds_core::concat::ConcatTranscript;
use viqds_core::soundness::{CqGame, CqRecord, GameDims, GameSpec, SolveReport};
use viqds_core::vis::{Response, Transcript};
use viqds_core::CMatrix;

use crate::error::{AppError, AppResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub factors: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn encode(m: &CMatrix, factors: &[usize]) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            factors: factors.to_vec(),
            data: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn decode(&self) -> AppResult<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(AppError::Format(format!(
                "matrix data has {} entries, expected {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        let product: usize = self.factors.iter().product();
        if !self.factors.is_empty() && product != self.rows {
            return Err(AppError::Format(format!(
                "factor dimensions multiply to {product}, matrix has {} rows",
                self.rows
            )));
        }
        let data = self.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(CMatrix::from_vec(self.rows, self.cols, data)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub weight: f64,
    pub rho_a: MatrixJson,
    pub pi_b: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameFile {
    /// `rho` on `R ⊗ A`, `pi_acc` on `R ⊗ B`.
    Dense {
        dim_r: usize,
        dim_a: usize,
        dim_b: usize,
        rho: MatrixJson,
        pi_acc: MatrixJson,
    },
    /// Classical `R`.
    Records {
        dim_a: usize,
        dim_b: usize,
        records: Vec<RecordJson>,
    },
}

pub enum Game {
    Dense(GameSpec),
    Records(CqGame),
}

impl GameFile {
    pub fn from_dense(game: &GameSpec) -> Self {
        let d = game.dims();
        GameFile::Dense {
            dim_r: d.r,
            dim_a: d.a,
            dim_b: d.b,
            rho: MatrixJson::encode(game.rho(), &[d.r, d.a]),
            pi_acc: MatrixJson::encode(game.pi_acc(), &[d.r, d.b]),
        }
    }

    pub fn from_records(game: &CqGame) -> Self {
        let d = game.dims();
        GameFile::Records {
            dim_a: d.a,
            dim_b: d.b,
            records: game
                .records()
                .iter()
                .map(|r| RecordJson {
                    weight: r.weight,
                    rho_a: MatrixJson::encode(&r.rho_a, &[d.a]),
                    pi_b: MatrixJson::encode(&r.pi_b, &[d.b]),
                })
                .collect(),
        }
    }

    pub fn decode(&self) -> AppResult<Game> {
        match self {
            GameFile::Dense {
                dim_r,
                dim_a,
                dim_b,
                rho,
                pi_acc,
            } => {
                let dims = GameDims {
                    r: *dim_r,
                    a: *dim_a,
                    b: *dim_b,
                };
                Ok(Game::Dense(GameSpec::new(dims, rho.decode()?, pi_acc.decode()?)?))
            }
            GameFile::Records { dim_a, dim_b, records } => {
                let records = records
                    .iter()
                    .map(|r| {
                        Ok(CqRecord {
                            weight: r.weight,
                            rho_a: r.rho_a.decode()?,
                            pi_b: r.pi_b.decode()?,
                        })
                    })
                    .collect::<AppResult<Vec<_>>>()?;
                Ok(Game::Records(CqGame::new(*dim_a, *dim_b, records)?))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstrumentFile {
    pub p: u32,
    pub components: usize,
    /// One Choi matrix per label, factors `(in_1.., out_1..)`.
    pub elements: Vec<MatrixJson>,
}

impl InstrumentFile {
    pub fn encode(inst: &Instrument) -> Self {
        let factors = vec![inst.p() as usize; 4 * inst.components()];
        Self {
            p: inst.p(),
            components: inst.components(),
            elements: inst.elements().iter().map(|e| MatrixJson::encode(e, &factors)).collect(),
        }
    }

    pub fn decode(&self) -> AppResult<Instrument> {
        let elements = self.elements.iter().map(MatrixJson::decode).collect::<AppResult<Vec<_>>>()?;
        Ok(Instrument::new(self.p, self.components, elements)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    pub p: u32,
    pub elements: Vec<MatrixJson>,
    pub abort: MatrixJson,
}

impl PovmFile {
    pub fn encode(povm: &Povm) -> Self {
        let n = povm.p() as usize;
        Self {
            p: povm.p(),
            elements: povm.elements().iter().map(|e| MatrixJson::encode(e, &[n, n])).collect(),
            abort: MatrixJson::encode(povm.abort(), &[n, n]),
        }
    }

    pub fn decode(&self) -> AppResult<Povm> {
        let elements = self.elements.iter().map(MatrixJson::decode).collect::<AppResult<Vec<_>>>()?;
        Ok(Povm::new(self.p, elements, self.abort.decode()?)?)
    }
}

/// A response as JSON: the field value, or the string `"abort"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResponseJson {
    Value(u32),
    Abort(AbortTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortTag {
    Abort,
}

impl From<Response> for ResponseJson {
    fn from(r: Response) -> Self {
        match r {
            Response::Value(j) => ResponseJson::Value(j.value()),
            Response::Abort => ResponseJson::Abort(AbortTag::Abort),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub p: u32,
    pub statement: usize,
    pub challenge: u32,
    pub k1: u32,
    pub k2: u32,
    pub response: ResponseJson,
    pub accept: bool,
    pub seed: u64,
}

impl From<&Transcript> for TranscriptJson {
    fn from(t: &Transcript) -> Self {
        Self {
            p: t.p,
            statement: t.statement,
            challenge: t.j.value(),
            k1: t.k1.value(),
            k2: t.k2.value(),
            response: t.response.into(),
            accept: t.accept,
            seed: t.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateTranscriptJson {
    pub components: Vec<TranscriptJson>,
    pub accept_all: bool,
}

impl From<&ConcatTranscript> for AggregateTranscriptJson {
    fn from(t: &ConcatTranscript) -> Self {
        Self {
            components: t.transcripts.iter().map(TranscriptJson::from).collect(),
            accept_all: t.accept_all,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReportJson {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub slack: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certified: bool,
}

impl From<&SolveReport> for SolveReportJson {
    fn from(r: &SolveReport) -> Self {
        Self {
            primal: r.primal,
            dual: r.dual,
            gap: r.gap,
            slack: r.slack,
            iterations: r.iterations,
            converged: r.converged,
            certified: r.certified,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| AppError::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| AppError::Io(path.display().to_string(), e))
}
