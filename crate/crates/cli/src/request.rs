//! Command-line analysis requests and their translation into balances.

use std::collections::BTreeMap;

use clap::{Args, ValueEnum};
use painleve::balance::{
    a_name, balance_bb, balance_equilibrium, balance_multi_case_i, balance_multi_case_ii, dos, uno, Balance,
    EllipsoidPoint, Sign, B0,
};
use painleve::rational::{parse_rational, parse_rational_list, serde_q_map, Rational};
use painleve::DimensionSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemArg {
    Warped,
    Bb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Uno,
    Dos,
    #[value(name = "caseI", alias = "casei", alias = "case-i")]
    CaseI,
    #[value(name = "caseII", alias = "caseii", alias = "case-ii")]
    CaseII,
    Bb,
    Equilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignArg {
    Plus,
    Minus,
}

/// Flags shared by every command that analyses one balance.
#[derive(Debug, Clone, Args)]
pub struct RequestArgs {
    /// Ansatz: warped product or bundle over a Kahler-Einstein base.
    #[arg(long, value_enum, default_value = "warped")]
    pub system: SystemArg,
    /// Factor dimensions of the warped product, comma separated.
    #[arg(long)]
    pub dims: Option<String>,
    /// Real dimension of the Kahler-Einstein base (bundle ansatz).
    #[arg(long)]
    pub d2: Option<u32>,
    /// Leading-order balance family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Sign of the leading exponent (dos family).
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    /// Number of factors with singular leading term (caseI).
    #[arg(long)]
    pub l: Option<usize>,
    /// Exponent ellipsoid point, comma separated rationals (caseII).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Binding for a_{1,0}.
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<String>,
    /// Binding for b0.
    #[arg(long, allow_hyphen_values = true)]
    pub b0: Option<String>,
    /// Additional binding `name=value`, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub params: Vec<String>,
}

/// A fully resolved request, echoed in every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub system: SystemArg,
    pub dims: DimensionSpec,
    pub family: FamilyArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<SignArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    /// Explicit bindings; unbound free parameters default to 1.
    #[serde(with = "serde_q_map")]
    pub bindings: BTreeMap<String, Rational>,
}

pub fn parse_dims(text: &str) -> Result<Vec<u32>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Invalid(format!("bad dimension {s:?} in --dims")))
        })
        .collect()
}

fn parse_q(flag: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Invalid(format!("{flag}: {e}")))
}

impl RequestArgs {
    pub fn resolve(&self) -> Result<AnalysisRequest, CliError> {
        let dims = match self.system {
            SystemArg::Warped => {
                let text = self
                    .dims
                    .as_deref()
                    .ok_or_else(|| CliError::Invalid("--dims is required for the warped system".into()))?;
                DimensionSpec::warped(&parse_dims(text)?)
            }
            SystemArg::Bb => {
                let d2 = self
                    .d2
                    .ok_or_else(|| CliError::Invalid("--d2 is required for the bb system".into()))?;
                DimensionSpec::bb(d2)
            }
        }
        .map_err(|e| CliError::Invalid(e.to_string()))?;

        let family = match (self.system, self.family) {
            (SystemArg::Bb, None | Some(FamilyArg::Bb)) => FamilyArg::Bb,
            (SystemArg::Bb, Some(FamilyArg::Equilibrium)) => FamilyArg::Equilibrium,
            (SystemArg::Bb, Some(f)) => {
                return Err(CliError::Invalid(format!("family {f:?} needs the warped system")))
            }
            (SystemArg::Warped, Some(FamilyArg::Bb)) => {
                return Err(CliError::Invalid("family bb needs --system bb".into()))
            }
            (SystemArg::Warped, Some(f)) => f,
            (SystemArg::Warped, None) => return Err(CliError::Invalid("--family is required".into())),
        };

        let mut bindings = BTreeMap::new();
        if let Some(a0) = &self.a0 {
            bindings.insert(a_name(1), parse_q("--a0", a0)?);
        }
        if let Some(b0) = &self.b0 {
            bindings.insert(B0.to_string(), parse_q("--b0", b0)?);
        }
        for p in &self.params {
            let (name, value) = p
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("--param expects NAME=VALUE, got {p:?}")))?;
            bindings.insert(name.trim().to_string(), parse_q("--param", value)?);
        }

        let point = match &self.point {
            Some(text) => Some(
                parse_rational_list(text)
                    .map_err(|e| CliError::Invalid(format!("--point: {e}")))?
                    .iter()
                    .map(ToString::to_string)
                    .collect(),
            ),
            None => None,
        };
        Ok(AnalysisRequest {
            system: self.system,
            dims,
            family,
            sign: self.sign,
            l: self.l,
            point,
            bindings,
        })
    }
}

impl AnalysisRequest {
    pub fn balance(&self) -> Result<Balance, CliError> {
        let dims = self.dims.factor_dims();
        let invalid = |e: painleve::balance::BalanceError| CliError::Invalid(e.to_string());
        match self.family {
            FamilyArg::Uno => {
                let [d1] = dims else {
                    return Err(CliError::Invalid("uno needs exactly one factor".into()));
                };
                uno(*d1).map_err(invalid)
            }
            FamilyArg::Dos => {
                let [d1] = dims else {
                    return Err(CliError::Invalid("dos needs exactly one factor".into()));
                };
                let sign = match self.sign {
                    Some(SignArg::Plus) => Sign::Plus,
                    Some(SignArg::Minus) => Sign::Minus,
                    None => return Err(CliError::Invalid("dos needs --sign plus|minus".into())),
                };
                dos(*d1, sign).map_err(invalid)
            }
            FamilyArg::CaseI => {
                let l = self
                    .l
                    .ok_or_else(|| CliError::Invalid("caseI needs --l".into()))?;
                balance_multi_case_i(dims, l).map_err(invalid)
            }
            FamilyArg::CaseII => {
                let point = self
                    .point
                    .as_ref()
                    .ok_or_else(|| CliError::Invalid("caseII needs --point".into()))?;
                let coords = point
                    .iter()
                    .map(|p| parse_q("--point", p))
                    .collect::<Result<Vec<_>, _>>()?;
                balance_multi_case_ii(dims, &EllipsoidPoint::new(coords)).map_err(invalid)
            }
            FamilyArg::Bb => {
                let DimensionSpec::BerardBergery { d2 } = self.dims else {
                    return Err(CliError::Invalid("bb needs --system bb".into()));
                };
                balance_bb(d2).map_err(invalid)
            }
            FamilyArg::Equilibrium => balance_equilibrium(&self.dims).map_err(invalid),
        }
    }

    /// Defaults (every free parameter 1) overridden by the explicit bindings.
    pub fn params(&self, bal: &Balance) -> BTreeMap<String, Rational> {
        let mut params = bal.default_params();
        params.extend(self.bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
        params
    }
}
