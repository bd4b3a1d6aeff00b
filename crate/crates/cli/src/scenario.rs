//! Scenario files: one JSON document bundling the lattice data a command
//! needs. Sections beyond `lattice` are optional and only required by the
//! variants that use them.

use mukai_core::normalize::NormalizationResult;
use mukai_core::{
    is_isotropic, mukai_pairing, normalize_full, normalize_prime_split, normalize_pullback,
    normalize_supersingular, random_isometry, to_lattice_spec, validate_cover, validate_isometry,
    validate_lattice, CoverDatum, Error as CoreError, HomLattice, IsometryWord, LatticeSpec,
    MukaiVector, SearchLimits, WordData,
};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Deserialize)]
pub struct Scenario {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub word: Option<WordData>,
    #[serde(default)]
    pub hom_lattice: Option<HomLattice>,
    #[serde(default)]
    pub cover: Option<CoverDatum>,
    #[serde(default)]
    pub primes: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
pub struct ScenarioReport {
    pub checks: Vec<String>,
    pub valid: bool,
}

pub enum RunError {
    Core(CoreError),
    Usage(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Core(e)
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
    }

    /// Run every validator that applies to the sections present.
    pub fn validate(&self) -> ScenarioReport {
        let mut checks = Vec::new();
        let mut valid = true;

        let report = validate_lattice(&self.lattice);
        if report.valid {
            checks.push("lattice: ok".to_string());
        } else {
            valid = false;
            for v in report.violations {
                checks.push(format!("lattice: {v}"));
            }
        }

        if let Some(word) = &self.word {
            match word.clone().bind(&self.lattice) {
                Ok(bound) => {
                    if validate_isometry(&self.lattice, bound.matrix()) {
                        checks.push(format!("word: ok ({} generators)", bound.len()));
                    } else {
                        valid = false;
                        checks.push("word: matrix does not preserve the Mukai form".to_string());
                    }
                }
                Err(e) => {
                    valid = false;
                    checks.push(format!("word: {e}"));
                }
            }
        }

        if let Some(hom) = &self.hom_lattice {
            match hom.validate() {
                Ok(()) => checks.push("hom_lattice: ok".to_string()),
                Err(e) => {
                    valid = false;
                    checks.push(format!("hom_lattice: {e}"));
                }
            }
        }

        if let Some(cover) = &self.cover {
            match &self.hom_lattice {
                Some(hom) => match to_lattice_spec(hom, 1, 1) {
                    Ok(prod) => {
                        if validate_cover(&prod, &self.lattice, cover) {
                            checks.push("cover: ok".to_string());
                        } else {
                            valid = false;
                            checks.push(
                                "cover: scaling, image or exponent condition failed".to_string(),
                            );
                        }
                    }
                    Err(e) => {
                        valid = false;
                        checks.push(format!("cover: product lattice invalid: {e}"));
                    }
                },
                None => {
                    valid = false;
                    checks.push("cover: requires a hom_lattice section".to_string());
                }
            }
        }

        ScenarioReport { checks, valid }
    }

    fn bound_word(&self, seed: Option<u64>) -> Result<IsometryWord, RunError> {
        if let Some(word) = &self.word {
            return word.clone().bind(&self.lattice).map_err(RunError::Core);
        }
        let seed = seed.or(self.seed);
        match seed {
            Some(s) => Ok(random_isometry(&self.lattice, s, 10)),
            None => Ok(IsometryWord::identity(&self.lattice)),
        }
    }

    pub fn run_normalize(
        &self,
        variant: &str,
        primes_flag: &[u64],
        seed: Option<u64>,
        limits: SearchLimits,
    ) -> Result<NormalizationResult, RunError> {
        let word = self.bound_word(seed)?;
        let primes: Vec<u64> = if primes_flag.is_empty() {
            self.primes.clone().unwrap_or_default()
        } else {
            primes_flag.to_vec()
        };
        match variant {
            "full" => Ok(normalize_full(&self.lattice, &word, limits)?),
            "prime-split" => {
                if primes.len() < 2 {
                    return Err(RunError::Usage(
                        "prime-split needs two primes (--primes p1,p2)".to_string(),
                    ));
                }
                Ok(normalize_prime_split(
                    &self.lattice,
                    &word,
                    &BigInt::from(primes[0]),
                    &BigInt::from(primes[1]),
                    limits,
                )?)
            }
            "pullback" => {
                let (hom, cover) = self.cover_sections("pullback")?;
                let prod = to_lattice_spec(hom, 1, 1)?;
                let p = match primes.first() {
                    Some(&p) => BigInt::from(p),
                    None => hom.p.clone(),
                };
                Ok(normalize_pullback(
                    &prod,
                    cover,
                    &self.lattice,
                    &word,
                    &p,
                    limits,
                )?)
            }
            "supersingular" => {
                let (hom, cover) = self.cover_sections("supersingular")?;
                let t = match primes.first() {
                    Some(&t) => BigInt::from(t),
                    None => {
                        // Smallest prime different from the characteristic.
                        if hom.p == BigInt::from(2) {
                            BigInt::from(3)
                        } else {
                            BigInt::from(2)
                        }
                    }
                };
                Ok(normalize_supersingular(
                    hom,
                    cover,
                    &self.lattice,
                    &word,
                    &t,
                    limits,
                )?)
            }
            other => Err(RunError::Usage(format!("unknown variant {other}"))),
        }
    }

    fn cover_sections(&self, variant: &str) -> Result<(&HomLattice, &CoverDatum), RunError> {
        let hom = self.hom_lattice.as_ref().ok_or_else(|| {
            RunError::Usage(format!("variant {variant} needs a hom_lattice section"))
        })?;
        let cover = self
            .cover
            .as_ref()
            .ok_or_else(|| RunError::Usage(format!("variant {variant} needs a cover section")))?;
        Ok((hom, cover))
    }

    pub fn pair(&self, v: &[i64], w: &[i64]) -> Result<serde_json::Value, CoreError> {
        let want = self.lattice.rank + 2;
        let build = |coords: &[i64]| -> Result<MukaiVector, CoreError> {
            if coords.len() != want {
                return Err(CoreError::DimensionMismatch {
                    expected: want,
                    got: coords.len(),
                    context: "pair vector encoding r,l..,chi",
                });
            }
            let big: Vec<BigInt> = coords.iter().map(|&x| BigInt::from(x)).collect();
            Ok(MukaiVector::from_coords(&big))
        };
        let v = build(v)?;
        let w = build(w)?;
        let pairing = mukai_pairing(&self.lattice, &v, &w)?;
        Ok(serde_json::json!({
            "pairing": serde_json::Number::from_str(&pairing.to_string()).expect("integer"),
            "isotropic_v": is_isotropic(&self.lattice, &v)?,
            "isotropic_w": is_isotropic(&self.lattice, &w)?,
        }))
    }
}

use std::str::FromStr;
