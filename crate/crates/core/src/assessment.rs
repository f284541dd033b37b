//! Environmental assessment of a fixed plan, computed directly from activity
//! magnitudes and boiler powers without going through the solver.
//!
//! Units: boiler powers in MW, emission factors in g/GJ of fuel, emissions in
//! g/yr and indicators in kg of the reference substance per year.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{IndicatorValue, PlanInstance};

pub const GJ_PER_MWH: f64 = 3.6;
pub const GRAMS_PER_KG: f64 = 1000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssessmentError {
    #[error("unknown activity {0:?}")]
    UnknownActivity(String),
    #[error("unknown boiler {0:?}")]
    UnknownBoiler(String),
    #[error("{what}: expected {expected} values, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("boiler {0:?} has negative power {1}")]
    NegativePower(String, f64),
    #[error("emission {0:?} is negative ({1})")]
    NegativeEmission(String, f64),
    #[error("efficiency must be positive, found {0}")]
    Efficiency(f64),
    #[error("activity {id:?} magnitude {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        id: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub pressures: IndexMap<String, f64>,
    pub receptors: IndexMap<String, f64>,
    pub emissions: IndexMap<String, f64>,
    pub indicators: IndexMap<String, IndicatorValue>,
}

/// Fuel energy in GJ burnt per year by 1 MW of output capacity.
pub fn fuel_gj_per_mw(instance: &PlanInstance) -> f64 {
    instance.hours_per_year / instance.efficiency * GJ_PER_MWH
}

fn dense_by_id<'a>(
    ids: impl Iterator<Item = &'a str>,
    values: &IndexMap<String, f64>,
    unknown: impl Fn(String) -> AssessmentError,
) -> Result<Vec<f64>, AssessmentError> {
    let ids: Vec<&str> = ids.collect();
    let mut out = vec![0.0; ids.len()];
    for (id, v) in values {
        let k = ids.iter().position(|x| x == id).ok_or_else(|| unknown(id.clone()))?;
        out[k] = *v;
    }
    Ok(out)
}

/// Activity magnitudes in instance order; absent activities count as zero.
pub fn magnitudes_vector(
    instance: &PlanInstance,
    magnitudes: &IndexMap<String, f64>,
) -> Result<Vec<f64>, AssessmentError> {
    dense_by_id(
        instance.activities.iter().map(|a| a.id.as_str()),
        magnitudes,
        AssessmentError::UnknownActivity,
    )
}

pub fn boiler_vector(
    instance: &PlanInstance,
    boiler_powers: &IndexMap<String, f64>,
) -> Result<Vec<f64>, AssessmentError> {
    dense_by_id(
        instance.boilers.iter().map(|b| b.id.as_str()),
        boiler_powers,
        AssessmentError::UnknownBoiler,
    )
}

pub fn check_bounds(instance: &PlanInstance, magnitudes: &[f64]) -> Result<(), AssessmentError> {
    for (a, &v) in instance.activities.iter().zip(magnitudes) {
        if v < a.lower - 1e-9 || v > a.upper + 1e-9 {
            return Err(AssessmentError::OutOfBounds {
                id: a.id.clone(),
                value: v,
                lower: a.lower,
                upper: a.upper,
            });
        }
    }
    Ok(())
}

fn expect_len(what: &'static str, expected: usize, found: usize) -> Result<(), AssessmentError> {
    if expected == found {
        Ok(())
    } else {
        Err(AssessmentError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Pressures from the positive parts of the activity magnitudes.
pub fn compute_pressures(instance: &PlanInstance, magnitudes: &[f64]) -> Result<Vec<f64>, AssessmentError> {
    expect_len("activity magnitudes", instance.activities.len(), magnitudes.len())?;
    let mut pressures = vec![0.0; instance.pressure_names.len()];
    for (i, &m) in magnitudes.iter().enumerate() {
        let positive = m.max(0.0);
        if positive == 0.0 {
            continue;
        }
        for (j, p) in pressures.iter_mut().enumerate() {
            *p += instance.mop.get(i, j) * positive;
        }
    }
    Ok(pressures)
}

pub fn compute_receptors(instance: &PlanInstance, pressures: &[f64]) -> Result<Vec<f64>, AssessmentError> {
    expect_len("pressures", instance.pressure_names.len(), pressures.len())?;
    let mut receptors = vec![0.0; instance.receptor_names.len()];
    for (i, &p) in pressures.iter().enumerate() {
        for (j, r) in receptors.iter_mut().enumerate() {
            *r += instance.mpr.get(i, j) * p;
        }
    }
    Ok(receptors)
}

pub fn compute_emissions(instance: &PlanInstance, boiler_powers: &[f64]) -> Result<Vec<f64>, AssessmentError> {
    expect_len("boiler powers", instance.boilers.len(), boiler_powers.len())?;
    if instance.efficiency <= 0.0 {
        return Err(AssessmentError::Efficiency(instance.efficiency));
    }
    for (b, &p) in instance.boilers.iter().zip(boiler_powers) {
        if p < 0.0 {
            return Err(AssessmentError::NegativePower(b.id.clone(), p));
        }
    }
    let fuel = fuel_gj_per_mw(instance);
    let emissions = (0..instance.emission_names.len())
        .map(|e| {
            boiler_powers
                .iter()
                .enumerate()
                .map(|(j, &b)| instance.mec.get(e, j) * fuel * b)
                .sum()
        })
        .collect();
    Ok(emissions)
}

/// Indicator triples; an emission without a factor row contributes zero.
pub fn compute_indicators(
    instance: &PlanInstance,
    emissions: &[f64],
) -> Result<Vec<IndicatorValue>, AssessmentError> {
    expect_len("emissions", instance.emission_names.len(), emissions.len())?;
    for (name, &e) in instance.emission_names.iter().zip(emissions) {
        if e < 0.0 {
            return Err(AssessmentError::NegativeEmission(name.clone(), e));
        }
    }
    Ok(instance
        .indicator_tables
        .iter()
        .map(|table| {
            let mut total = IndicatorValue::default();
            for (name, &grams) in instance.emission_names.iter().zip(emissions) {
                if let Some(f) = table.factors.get(name) {
                    let kg = grams / GRAMS_PER_KG;
                    total.best += f.best * kg;
                    total.average += f.average * kg;
                    total.worst += f.worst * kg;
                }
            }
            total
        })
        .collect())
}

/// Boiler powers implied by the magnitudes when every boiler-equipped
/// operating activity has exactly one; `None` when the split among boilers is
/// ambiguous.
pub fn derive_boiler_powers(instance: &PlanInstance, magnitudes: &[f64]) -> Option<Vec<f64>> {
    let mut powers = vec![0.0; instance.boilers.len()];
    for (i, &m) in magnitudes.iter().enumerate() {
        if m <= 0.0 || !instance.has_boilers(i) {
            continue;
        }
        let row = instance.moc.row(i);
        let mut used = (0..row.len()).filter(|&j| row[j] != 0.0);
        let j = used.next()?;
        if used.next().is_some() {
            return None;
        }
        powers[j] += m / row[j];
    }
    Some(powers)
}

fn named<T: Copy>(names: impl Iterator<Item = String>, values: &[T]) -> IndexMap<String, T> {
    names.zip(values.iter().copied()).collect()
}

pub fn assess_vectors(
    instance: &PlanInstance,
    magnitudes: &[f64],
    boiler_powers: &[f64],
) -> Result<AssessmentResult, AssessmentError> {
    let pressures = compute_pressures(instance, magnitudes)?;
    let receptors = compute_receptors(instance, &pressures)?;
    let emissions = compute_emissions(instance, boiler_powers)?;
    let indicators = compute_indicators(instance, &emissions)?;
    Ok(AssessmentResult {
        pressures: named(instance.pressure_names.iter().cloned(), &pressures),
        receptors: named(instance.receptor_names.iter().cloned(), &receptors),
        emissions: named(instance.emission_names.iter().cloned(), &emissions),
        indicators: named(instance.indicator_tables.iter().map(|t| t.name.clone()), &indicators),
    })
}

/// Full assessment of a plan given by activity id and boiler id.
pub fn assess(
    instance: &PlanInstance,
    magnitudes: &IndexMap<String, f64>,
    boiler_powers: &IndexMap<String, f64>,
) -> Result<AssessmentResult, AssessmentError> {
    let m = magnitudes_vector(instance, magnitudes)?;
    let b = boiler_vector(instance, boiler_powers)?;
    assess_vectors(instance, &m, &b)
}
