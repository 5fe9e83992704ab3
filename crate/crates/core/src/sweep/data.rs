use std::path::Path;

use crate::assets::{read_profile_csv, synth_pv, with_path, LoadProfile, ProfileSeries, PvProfile};
use crate::calendar::{build_time_grid, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tariff::{load_tariff, TariffSchedule};

use super::config::{SweepConfig, TariffChoice};

/// Twelve months of grids and input profiles for one year.
#[derive(Debug, Clone)]
pub struct AnnualData<T> {
    pub year: i32,
    pub grids: Vec<TimeGrid>,
    pub loads: Vec<LoadProfile<T>>,
    pub pvs: Vec<PvProfile<T>>,
    /// Maximum base demand over the year, kW.
    pub annual_max: T,
}

impl<T: Scalar> AnnualData<T> {
    /// Slices a load series (and optionally a PV series) into the twelve
    /// months of `year`. Without a PV series, a synthetic profile with the
    /// given nameplate is generated.
    pub fn from_series(
        year: i32,
        load: &ProfileSeries<T>,
        pv: Option<&ProfileSeries<T>>,
        pv_nameplate: Option<T>,
    ) -> Result<Self> {
        let grids = (1..=12).map(|m| build_time_grid(year, m)).collect::<Result<Vec<_>>>()?;
        let mut loads = Vec::with_capacity(12);
        for g in &grids {
            loads.push(LoadProfile::new(load.slice(g)?.to_vec(), T::zero().max(load.max()))?);
        }
        let annual_max = loads
            .iter()
            .flat_map(|l| l.d_base.iter().copied())
            .fold(T::zero(), T::max);
        for l in &mut loads {
            l.annual_max = annual_max;
        }
        let mut pvs = Vec::with_capacity(12);
        for g in &grids {
            pvs.push(match pv {
                Some(series) => PvProfile::new(
                    series.slice(g)?.to_vec(),
                    pv_nameplate.unwrap_or_else(|| series.max()),
                )?,
                None => match pv_nameplate {
                    Some(np) => synth_pv(np, g)?,
                    None => PvProfile::zeros(g.len()),
                },
            });
        }
        Ok(Self {
            year,
            grids,
            loads,
            pvs,
            annual_max,
        })
    }

    pub fn load(cfg: &SweepConfig) -> Result<Self> {
        let load_path = cfg.resolve(&cfg.load_csv);
        let load = read_profile_csv::<T>(&load_path)?;
        let pv = match &cfg.pv_csv {
            Some(p) => {
                let path = cfg.resolve(p);
                Some((read_profile_csv::<T>(&path)?, path))
            }
            None => None,
        };
        let nameplate = cfg.pv_nameplate_kw.map(T::lit);
        Self::from_series(cfg.year, &load, pv.as_ref().map(|(s, _)| s), nameplate).map_err(|e| {
            let blame: &Path = match (&e, &pv) {
                (Error::Asset(m), Some((_, p))) if m.contains("PV") => p,
                _ => &load_path,
            };
            with_path(e, blame)
        })
    }

    pub fn month_index(&self, month: u32) -> Result<usize> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidMonth(month));
        }
        Ok(month as usize - 1)
    }
}

/// Both tariffs of a comparison.
#[derive(Debug, Clone)]
pub struct TariffPair<T> {
    pub base: TariffSchedule<T>,
    pub storage: TariffSchedule<T>,
}

impl<T: Scalar> TariffPair<T> {
    pub fn load(cfg: &SweepConfig) -> Result<Self> {
        Ok(Self {
            base: load_tariff(cfg.resolve(&cfg.base_tariff))?,
            storage: load_tariff(cfg.resolve(&cfg.storage_tariff))?,
        })
    }

    pub fn get(&self, which: TariffChoice) -> &TariffSchedule<T> {
        match which {
            TariffChoice::Base => &self.base,
            TariffChoice::Storage => &self.storage,
        }
    }
}
