//! Signature scenarios read from JSON.
//!
//! ```json
//! {"p": 2, "L": 2, "N": 3, "l": 1, "messages": [0, 1],
//!  "adversary": {"kind": "respond_constant", "parameters": {"value": 0}},
//!  "seed": 7, "sessions": 1000}
//! ```
//!
//! Adversary kinds: `none`, `respond_constant` (`value`), `povm` (`seed`,
//! `with_abort`, or `file`), `relay_own_copy`, `forward_challenge`. With a
//! `bits` string the repeated single-bit scheme is run instead and the
//! adversary, if any, attacks bit `parameters.bit`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use viqds_core::adversaries::Povm;
use viqds_core::concat::ConcatProtocol;
use viqds_core::random::{derive_seed, seeded};
use viqds_core::viqds::{
    bitwise_sign, deterrent_round, forge_attack, keygen, keygen_bitwise, sign_session, ForgeStrategy,
    ForgeryReport, ForgeryScenario, SignatureRecord,
};

use crate::error::{AppError, AppResult};
use crate::format::{read_json, PovmFile, ResponseJson};
use crate::report::Row;
use crate::row;

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adversary {
    pub kind: String,
    #[serde(default)]
    pub parameters: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub p: u32,
    #[serde(rename = "L")]
    pub message_space: usize,
    #[serde(rename = "N")]
    pub participants: usize,
    #[serde(default = "one")]
    pub l: usize,
    pub messages: Vec<usize>,
    pub adversary: Adversary,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sessions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
    /// Probability with which each participant is asked to spot-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterrent: Option<f64>,
}

pub struct Outcome {
    pub rows: Vec<Row>,
    /// One JSON object per session.
    pub log: Vec<Value>,
    pub pass: bool,
}

impl Scenario {
    pub fn load(path: &Path) -> AppResult<Self> {
        let mut s: Scenario = read_json(path)?;
        // Relative POVM files resolve against the scenario's directory.
        if let Some(Value::String(f)) = s.adversary.parameters.get("file") {
            let base = path.parent().unwrap_or(Path::new("."));
            let full: PathBuf = base.join(f);
            s.adversary.parameters["file"] = Value::String(full.display().to_string());
        }
        Ok(s)
    }

    pub fn honest(p: u32, seed: u64, sessions: usize) -> Self {
        Self {
            p,
            message_space: 2,
            participants: 3,
            l: 1,
            messages: vec![0, 1],
            adversary: Adversary {
                kind: "none".into(),
                parameters: Value::Null,
            },
            seed,
            sessions: Some(sessions),
            bits: None,
            deterrent: None,
        }
    }

    fn check(&self) -> AppResult<()> {
        if self.message_space < 2 {
            return Err(AppError::Format("L must be at least 2".into()));
        }
        if self.participants == 0 {
            return Err(AppError::Format("N must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(AppError::Format("l must be at least 1".into()));
        }
        if let Some(&m) = self.messages.iter().find(|&&m| m >= self.message_space) {
            return Err(AppError::Format(format!("message {m} is outside 0..{}", self.message_space)));
        }
        if self.messages.is_empty() && self.bits.is_none() {
            return Err(AppError::Format("no messages to sign".into()));
        }
        Ok(())
    }

    fn strategy(&self) -> AppResult<Option<ForgeStrategy>> {
        let params = &self.adversary.parameters;
        let s = match self.adversary.kind.as_str() {
            "none" => return Ok(None),
            "respond_constant" => {
                let v = params.get("value").and_then(Value::as_u64).unwrap_or(0);
                ForgeStrategy::RespondConstant((v % self.p as u64) as u32)
            }
            "povm" => {
                let povm = match params.get("file").and_then(Value::as_str) {
                    Some(f) => read_json::<PovmFile>(Path::new(f))?.decode()?,
                    None => {
                        let seed = params.get("seed").and_then(Value::as_u64).unwrap_or(0);
                        let abort = params.get("with_abort").and_then(Value::as_bool).unwrap_or(false);
                        Povm::random(&mut seeded(seed), self.p, abort)?
                    }
                };
                ForgeStrategy::Povm(povm)
            }
            "relay_own_copy" => ForgeStrategy::RelayFromOwnCopy,
            "forward_challenge" => ForgeStrategy::ForwardChallenge,
            other => return Err(AppError::Format(format!("unknown adversary kind {other:?}"))),
        };
        Ok(Some(s))
    }

    pub fn run(&self, default_sessions: usize) -> AppResult<Outcome> {
        self.check()?;
        let sessions = self.sessions.unwrap_or(default_sessions);
        let proto = ConcatProtocol::homogeneous(self.p, self.l)?;
        // The strategy exists before any key does.
        let strategy = self.strategy()?;
        match &self.bits {
            Some(bits) => self.run_bitwise(&proto, bits, strategy, sessions),
            None => self.run_messages(&proto, strategy, sessions),
        }
    }

    fn run_messages(&self, proto: &ConcatProtocol, strategy: Option<ForgeStrategy>, sessions: usize) -> AppResult<Outcome> {
        let forgery = match strategy {
            Some(s) => {
                if self.messages.len() < 2 {
                    return Err(AppError::Format("forging needs a requested and a substituted message".into()));
                }
                Some(ForgeryScenario::new(self.messages[0], self.messages[1], s)?)
            }
            None => None,
        };
        let mut rng = seeded(self.seed);
        let (keys, parts) = keygen(proto, self.message_space, self.participants, &mut rng)?;
        let mut rows = Vec::new();
        let mut log = Vec::new();
        let mut pass = true;
        match forgery {
            None => {
                let mut accepted = 0;
                for s in 0..sessions {
                    let m = self.messages[s % self.messages.len()];
                    let verifier = &parts[s % parts.len()];
                    let rec = sign_session(proto, &keys, verifier, m, derive_seed(self.seed, s as u64 + 1))?;
                    accepted += usize::from(rec.accept);
                    log.push(session_json(s, verifier.id, &rec));
                }
                let rate = accepted as f64 / sessions.max(1) as f64;
                pass &= accepted == sessions;
                rows.push(row! {
                    "name" => "completeness", "sessions" => sessions, "accepted" => accepted,
                    "rate" => rate, "pass" => accepted == sessions,
                });
                if let Some(rate) = self.deterrent {
                    let m = self.messages[0];
                    let checks = deterrent_round(proto, &keys, &parts, m, rate, derive_seed(self.seed, 0))?;
                    let ok = checks.iter().filter(|(_, r)| r.accept).count();
                    rows.push(row! {"name" => "deterrent", "checks" => checks.len(), "accepted" => ok});
                }
            }
            Some(scenario) => {
                let report = forge_attack(proto, &scenario, &keys, &parts[0], sessions, derive_seed(self.seed, 0))?;
                for (s, ok) in report.outcomes.iter().enumerate() {
                    log.push(json!({"session": s, "forged": ok}));
                }
                let row = forgery_row(scenario.strategy().name(), &report);
                pass &= row["pass"] == true;
                rows.push(row);
            }
        }
        Ok(Outcome { rows, log, pass })
    }

    fn run_bitwise(
        &self,
        proto: &ConcatProtocol,
        bits: &str,
        strategy: Option<ForgeStrategy>,
        sessions: usize,
    ) -> AppResult<Outcome> {
        let bits: Vec<bool> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(AppError::Format(format!("bit string contains {c:?}"))),
            })
            .collect::<AppResult<_>>()?;
        if bits.is_empty() {
            return Err(AppError::Format("empty bit string".into()));
        }
        let target = self.adversary.parameters.get("bit").and_then(Value::as_u64).unwrap_or(0) as usize;
        if target >= bits.len() {
            return Err(AppError::Format(format!("bit {target} is outside the message")));
        }
        let forgery = match strategy {
            Some(s) => {
                let m = usize::from(bits[target]);
                Some(ForgeryScenario::new(m, 1 - m, s)?)
            }
            None => None,
        };
        let mut rng = seeded(self.seed);
        let (keys, parts) = keygen_bitwise(proto, bits.len(), self.participants, &mut rng)?;
        let mut rows = Vec::new();
        let mut log = Vec::new();
        let mut accepted = 0;
        let mut resources = None;
        for s in 0..sessions {
            let verifier = &parts[s % parts.len()];
            let sig = bitwise_sign(proto, &bits, &keys, verifier, derive_seed(self.seed, s as u64 + 1))?;
            accepted += usize::from(sig.accept);
            resources = Some(sig.resources);
            log.push(json!({
                "session": s,
                "verifier": verifier.id,
                "accept": sig.accept,
                "bits": sig.records.iter().map(|r| r.accept).collect::<Vec<_>>(),
            }));
        }
        let resources = match resources {
            Some(r) => r,
            None => viqds_core::viqds::Resources {
                key_systems: parts[0].key_systems(),
                challenges: bits.len(),
            },
        };
        rows.push(row! {
            "name" => "resources", "bits" => bits.len(),
            "key_systems" => resources.key_systems, "challenges" => resources.challenges,
        });
        let mut pass = accepted == sessions;
        rows.push(row! {
            "name" => "completeness", "sessions" => sessions, "accepted" => accepted,
            "rate" => accepted as f64 / sessions.max(1) as f64, "pass" => accepted == sessions,
        });
        if let Some(scenario) = forgery {
            let report = forge_attack(
                proto,
                &scenario,
                &keys.positions[target],
                &parts[0].positions[target],
                sessions,
                derive_seed(self.seed, 0),
            )?;
            // Every other bit is signed honestly and always accepted.
            let mut row = forgery_row(scenario.strategy().name(), &report);
            row.insert("bit".into(), json!(target));
            pass &= row["pass"] == true;
            rows.push(row);
        }
        Ok(Outcome { rows, log, pass })
    }
}

fn session_json(session: usize, verifier: usize, rec: &SignatureRecord) -> Value {
    json!({
        "session": session,
        "verifier": verifier,
        "message": rec.message,
        "challenges": rec.challenges.iter().map(|j| j.value()).collect::<Vec<_>>(),
        "signature": rec.signature.iter().map(|&r| ResponseJson::from(r)).collect::<Vec<_>>(),
        "accept": rec.accept,
        "seed": rec.seed,
    })
}

fn forgery_row(strategy: &str, r: &ForgeryReport) -> Row {
    row! {
        "name" => "forgery", "strategy" => strategy, "trials" => r.trials,
        "successes" => r.successes, "rate" => r.rate, "exact" => r.exact,
        "exact_given_key" => r.exact_given_key, "bound" => r.bound,
        "pass" => r.exact <= r.bound + 1e-12,
    }
}
