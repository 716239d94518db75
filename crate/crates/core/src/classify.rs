//! Infimum of K on an adjoint orbit: the seven-case decision procedure and
//! the limits of K approaching Z and infinity.

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::partition::{
    c_constant, match_lambda_forms, parity_class, rational_to_f64, successor_pair_dual, successor_pair_split,
    LambdaForm, Parity, Partition,
};
use crate::spectral::{spectral_profile, SpectralProfile};
use crate::tol::Tolerances;

/// Which closed form produced a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Formula {
    #[serde(rename = "C_pi")]
    CPi,
    #[serde(rename = "C_pi/4")]
    QuarterCPi,
    #[serde(rename = "4*C_pi")]
    FourCPi,
    #[serde(rename = "min_gap^2/sum_sq")]
    GapRatio,
    #[serde(rename = "normal_zero")]
    NormalZero,
    #[serde(rename = "boundary_zero")]
    BoundaryZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Value {
    pub value: f64,
    #[serde(serialize_with = "ser_rational")]
    pub exact: Option<Rational64>,
    pub formula: Formula,
}

fn ser_rational<S: Serializer>(r: &Option<Rational64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl Value {
    pub fn exact(r: Rational64, formula: Formula) -> Self {
        Value { value: rational_to_f64(r), exact: Some(r), formula }
    }

    pub fn float(value: f64, formula: Formula) -> Self {
        Value { value, exact: None, formula }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitCase {
    NotUniReal,
    OddWithDual,
    EvenForm,
    OddForm,
    NoForm,
    Nilpotent,
    NotDiagonalizable,
}

impl OrbitCase {
    pub fn id(self) -> u8 {
        match self {
            OrbitCase::NotUniReal => 1,
            OrbitCase::OddWithDual => 2,
            OrbitCase::EvenForm => 3,
            OrbitCase::OddForm => 4,
            OrbitCase::NoForm => 5,
            OrbitCase::Nilpotent => 6,
            OrbitCase::NotDiagonalizable => 7,
        }
    }
}

/// Where the infimum is realized: the SU(n)-orbit of a standard sl(2) of
/// the given type, or the unitary diagonalizations when `partition` is absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizingSet {
    pub partition: Option<Partition>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    pub partition: Partition,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitClassification {
    pub case_id: u8,
    pub case: OrbitCase,
    pub infimum: Value,
    pub achieved: bool,
    pub minimizing_set: Option<MinimizingSet>,
    /// Second critical level of case 2.
    pub extra_critical: Option<CriticalSet>,
    /// Critical level of case 4, above the unattained infimum.
    pub critical_value: Option<CriticalSet>,
    pub notes: Vec<String>,
}

/// Lambda forms of a uni-real diagonalizable profile, with the case-2 guards
/// applied so an all-odd expression always comes paired with its dual.
fn lambda_forms(profile: &SpectralProfile, tol: &Tolerances) -> Result<Option<Vec<LambdaForm>>> {
    let Some(values) = profile.realified() else {
        return Ok(None);
    };
    let mut forms = match_lambda_forms(&values, tol.lambda_round)?;
    if forms.len() == 1 {
        let f = forms[0].clone();
        if f.partition.all_odd() {
            if let Some(split) = successor_pair_split(&f.partition) {
                forms.push(LambdaForm { scale: 2.0 * f.scale, partition: split });
            }
        } else if let Some(dual) = successor_pair_dual(&f.partition) {
            if realizes(&dual, f.scale / 2.0, &values, tol.lambda_round) {
                forms.insert(0, LambdaForm { scale: f.scale / 2.0, partition: dual });
            }
        }
    }
    forms.sort_by_key(|f| !f.partition.all_odd());
    Ok(Some(forms))
}

fn realizes(p: &Partition, t: f64, values: &[f64], round_tol: f64) -> bool {
    let mut want: Vec<f64> = crate::partition::lambda_sequence(p)
        .sorted_desc()
        .into_iter()
        .map(|v| v as f64 * t)
        .collect();
    let mut got = values.to_vec();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = got.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    want.len() == got.len() && want.iter().zip(&got).all(|(w, g)| (w - g).abs() <= round_tol * scale)
}

/// `min_{x_i != x_j} |x_i - x_j|^2 / sum x_i^2`.
pub fn gap_ratio(values: &[f64], same_tol: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > same_tol * scale)
        .fold(f64::INFINITY, f64::min);
    if !gap.is_finite() {
        return Err(Error::ConstantInput);
    }
    let sum: f64 = values.iter().map(|v| v * v).sum();
    Ok(gap * gap / sum)
}

pub fn classify_orbit(a: &ComplexMatrix, tol: &Tolerances) -> Result<OrbitClassification> {
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    let profile = spectral_profile(a, tol)?;
    classify_profile(&profile, tol)
}

pub fn classify_profile(profile: &SpectralProfile, tol: &Tolerances) -> Result<OrbitClassification> {
    let standard = |p: &Partition| MinimizingSet {
        partition: Some(p.clone()),
        description: format!("SU(n)-orbit of the standard sl(2) of type {}", p.paren()),
    };
    let mut out = OrbitClassification {
        case_id: 0,
        case: OrbitCase::Nilpotent,
        infimum: Value::float(0.0, Formula::NormalZero),
        achieved: false,
        minimizing_set: None,
        extra_critical: None,
        critical_value: None,
        notes: Vec::new(),
    };

    if profile.nilpotent {
        let pi = profile.jordan_type().expect("nilpotent profile");
        out.case = OrbitCase::Nilpotent;
        out.infimum = Value::exact(c_constant(&pi)?, Formula::CPi);
        out.achieved = true;
        out.minimizing_set = Some(standard(&pi));
        out.notes.push(format!("Jordan type {}", pi.paren()));
    } else if !profile.diagonalizable {
        out.case = OrbitCase::NotDiagonalizable;
        out.infimum = Value::exact(Rational64::from_integer(0), Formula::BoundaryZero);
        out.notes.push("no critical points; infimum approached at the orbit boundary".into());
    } else if profile.uni_real_phase.is_none() {
        out.case = OrbitCase::NotUniReal;
        out.infimum = Value::exact(Rational64::from_integer(0), Formula::NormalZero);
        out.achieved = true;
        out.minimizing_set = Some(MinimizingSet {
            partition: None,
            description: "unitary diagonalizations (normal matrices in the orbit)".into(),
        });
        out.notes.push("no other critical points".into());
    } else {
        let forms = lambda_forms(profile, tol)?.expect("uni-real");
        match forms.as_slice() {
            [] => {
                let values = profile.realified().expect("uni-real");
                out.case = OrbitCase::NoForm;
                out.infimum = Value::float(gap_ratio(&values, tol.lambda_round)?, Formula::GapRatio);
                out.notes.push("no critical points; minimizing sequences approach Z".into());
                out.notes.push("boundedness of minimizing sequences is not known; divergence flag is heuristic".into());
            }
            [odd, dual, ..] => {
                let c = c_constant(&odd.partition)?;
                out.case = OrbitCase::OddWithDual;
                out.infimum = Value::exact(c, Formula::CPi);
                out.achieved = true;
                out.minimizing_set = Some(standard(&odd.partition));
                out.extra_critical = Some(CriticalSet {
                    partition: dual.partition.clone(),
                    value: Value::exact(c_constant(&dual.partition)?, Formula::FourCPi),
                });
            }
            [form] => {
                let c = c_constant(&form.partition)?;
                if parity_class(&form.partition) == Parity::Even {
                    out.case = OrbitCase::EvenForm;
                    out.infimum = Value::exact(c, Formula::CPi);
                    out.achieved = true;
                    out.minimizing_set = Some(standard(&form.partition));
                } else {
                    out.case = OrbitCase::OddForm;
                    out.infimum = Value::exact(c / 4, Formula::QuarterCPi);
                    out.critical_value = Some(CriticalSet {
                        partition: form.partition.clone(),
                        value: Value::exact(c, Formula::CPi),
                    });
                    out.notes.push("critical points reported without a stability label".into());
                }
            }
        }
    }
    out.case_id = out.case.id();
    Ok(out)
}

/// Inferior limit of K as the orbit approaches Z.
pub fn z_liminf(a: &ComplexMatrix, tol: &Tolerances) -> Result<Value> {
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    z_liminf_profile(&spectral_profile(a, tol)?, tol)
}

pub fn z_liminf_profile(profile: &SpectralProfile, tol: &Tolerances) -> Result<Value> {
    if profile.nilpotent {
        return Err(Error::Nilpotent);
    }
    if !profile.diagonalizable {
        return Ok(Value::exact(Rational64::from_integer(0), Formula::BoundaryZero));
    }
    let Some(forms) = lambda_forms(profile, tol)? else {
        return Err(Error::NotApplicable("eigenvalues are not uni-real".into()));
    };
    let mut best: Option<Value> = None;
    for f in &forms {
        let c = c_constant(&f.partition)?;
        let v = match parity_class(&f.partition) {
            Parity::Even => Value::exact(c, Formula::CPi),
            Parity::Odd => Value::exact(c / 4, Formula::QuarterCPi),
        };
        if best.is_none_or(|b| v.exact < b.exact) {
            best = Some(v);
        }
    }
    match best {
        Some(v) => Ok(v),
        None => {
            let values = profile.realified().expect("uni-real");
            Ok(Value::float(gap_ratio(&values, tol.lambda_round)?, Formula::GapRatio))
        }
    }
}

/// Inferior limit of K along sequences escaping to infinity: `C_{pi(A)}`.
pub fn infinity_liminf(a: &ComplexMatrix, tol: &Tolerances) -> Result<Value> {
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    let profile = spectral_profile(a, tol)?;
    Ok(Value::exact(c_constant(&profile.invariant_partition)?, Formula::CPi))
}

/// Every value the infimum can take: interior critical levels and the two
/// inferior limits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfimumCandidates {
    pub critical_values: Vec<Value>,
    pub z_liminf: Option<Value>,
    pub infinity_liminf: Value,
}

impl InfimumCandidates {
    pub fn min(&self) -> f64 {
        self.critical_values
            .iter()
            .chain(self.z_liminf.iter())
            .chain(std::iter::once(&self.infinity_liminf))
            .map(|v| v.value)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn infimum_candidates(a: &ComplexMatrix, tol: &Tolerances) -> Result<InfimumCandidates> {
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    let profile = spectral_profile(a, tol)?;
    let class = classify_profile(&profile, tol)?;
    let mut critical_values = Vec::new();
    if class.achieved {
        critical_values.push(class.infimum);
    }
    critical_values.extend(class.extra_critical.map(|c| c.value));
    critical_values.extend(class.critical_value.map(|c| c.value));
    let z = match z_liminf_profile(&profile, tol) {
        Ok(v) => Some(v),
        Err(Error::Nilpotent | Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(InfimumCandidates {
        critical_values,
        z_liminf: z,
        infinity_liminf: Value::exact(c_constant(&profile.invariant_partition)?, Formula::CPi),
    })
}
