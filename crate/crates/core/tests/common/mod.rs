#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use flextariff::assets::{synth_pv, BatterySpec, FlexSpec, LoadProfile, PvProfile};
use flextariff::calendar::{build_time_grid, default_peak_window, DayClass, HourRange, TimeGrid, TouRule};
use flextariff::lp::MonthProblem;
use flextariff::sweep::SweepConfig;
use flextariff::tariff::{TariffFile, TariffSchedule};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bundled_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bundled")
}

pub fn bundled_config() -> SweepConfig {
    SweepConfig::load(bundled_dir().join("example.json")).expect("bundled config loads")
}

fn rule(period: &str, ranges: &[(u32, u32)]) -> TouRule {
    TouRule {
        period: period.into(),
        months: (1..=12).collect(),
        day_class: DayClass::All,
        hour_ranges: ranges.iter().map(|&(a, b)| HourRange::new(a, b).unwrap()).collect(),
    }
}

fn tariff_from(rules: Vec<TouRule>, rates: &[(&str, f64, f64)], dr_max: f64, nbc: f64) -> TariffSchedule<f64> {
    let file = TariffFile {
        id: "random".into(),
        demand_rate_max: dr_max,
        demand_rates: rates.iter().map(|(p, d, _)| (p.to_string(), *d)).collect(),
        energy_rates: rates.iter().map(|(p, _, e)| (p.to_string(), *e)).collect(),
        non_bypassable_charge: nbc,
        tou_rules: rules,
        peak_window: default_peak_window(),
        daily_demand_rates: BTreeMap::new(),
        description: None,
    };
    TariffSchedule::from_file(&file).expect("random tariff is valid")
}

/// Three-period tariff with strictly positive demand rates and nbc.
pub fn random_tariff(rng: &mut ChaCha8Rng) -> TariffSchedule<f64> {
    let peak_start = rng.gen_range(12..=17);
    let peak_end = rng.gen_range(peak_start + 2..=23);
    let mid_start = peak_start - 2;
    let off = rng.gen_range(0.06..0.15);
    let mid = off + rng.gen_range(0.0..0.10);
    let peak = mid + rng.gen_range(0.0..0.30);
    let rules = vec![
        rule("off", &[(0, mid_start), (peak_end, 24)]),
        rule("mid", &[(mid_start, peak_start)]),
        rule("peak", &[(peak_start, peak_end)]),
    ];
    let rates = [
        ("off", rng.gen_range(0.1..2.0), off),
        ("mid", rng.gen_range(0.1..5.0), mid),
        ("peak", rng.gen_range(0.5..20.0), peak),
    ];
    tariff_from(rules, &rates, rng.gen_range(1.0..25.0), rng.gen_range(0.01..0.04))
}

/// Evening-peaked load with random level, peak height and noise.
pub fn random_load(rng: &mut ChaCha8Rng, grid: &TimeGrid) -> LoadProfile<f64> {
    let level = rng.gen_range(30.0..150.0);
    let bump = rng.gen_range(0.0..1.0) * level;
    let peak_hour = rng.gen_range(16.0..20.0);
    let d: Vec<f64> = (0..grid.len())
        .map(|t| {
            let h = grid.minute_of_day(t) as f64 / 60.0;
            let shape = level + bump * (-((h - peak_hour) / 2.0f64).powi(2)).exp();
            (shape * rng.gen_range(0.85..1.15)).max(0.0)
        })
        .collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    LoadProfile::new(d, max).unwrap()
}

/// Randomised full-month instance; `mix` selects none, flex, battery or both.
pub struct MonthInstance {
    pub grid: TimeGrid,
    pub tariff: TariffSchedule<f64>,
    pub load: LoadProfile<f64>,
    pub pv: PvProfile<f64>,
    pub flex: Option<FlexSpec<f64>>,
    pub battery: Option<BatterySpec<f64>>,
}

impl MonthInstance {
    pub fn random(rng: &mut ChaCha8Rng, mix: usize) -> Self {
        let grid = build_time_grid(2021, rng.gen_range(1..=12)).unwrap();
        let tariff = random_tariff(rng);
        let load = random_load(rng, &grid);
        let peak = load.annual_max;
        let pv = synth_pv(rng.gen_range(0.0..1.2) * peak, &grid).unwrap();
        let flex = (mix & 1 == 1).then(|| {
            let hours = [1.0, 2.0, 4.0, 8.0, 12.0, 24.0][rng.gen_range(0..6)];
            FlexSpec::new(rng.gen_range(0.05..1.0), hours).unwrap()
        });
        let battery = (mix & 2 == 2).then(|| {
            let bpr = rng.gen_range(0.05..1.4) * peak;
            let ber = bpr * rng.gen_range(1.0..4.0);
            BatterySpec::new(bpr, ber, rng.gen_range(0.8..0.95), ber * rng.gen_range(0.0..1.0)).unwrap()
        });
        Self {
            grid,
            tariff,
            load,
            pv,
            flex,
            battery,
        }
    }

    pub fn problem(&self) -> MonthProblem<'_, f64> {
        let mut p = MonthProblem::new(&self.grid, &self.tariff, &self.load, &self.pv);
        if let Some(f) = &self.flex {
            p = p.with_flex(f);
        }
        if let Some(b) = self.battery {
            p = p.with_battery(b);
        }
        p
    }
}

/// Flex-only toy: eight steps, constant base demand, two TOU periods.
pub struct FlexToy {
    pub grid: TimeGrid,
    pub tariff: TariffSchedule<f64>,
    pub base: f64,
    pub pv: Vec<f64>,
    pub flex_pct: f64,
    pub delta: usize,
}

pub const TOY_STEPS: usize = 8;
/// Enumeration grid spacing as a fraction of base demand.
pub const GRID_FRACTION: f64 = 0.05;

impl FlexToy {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let grid = build_time_grid(2021, rng.gen_range(1..=12)).unwrap().truncated(TOY_STEPS);
        // Steps 0..4 fall in hour 0, steps 4..8 in hour 1.
        let rules = vec![rule("a", &[(0, 1), (2, 24)]), rule("b", &[(1, 2)])];
        let er_a: f64 = rng.gen_range(0.05..0.20);
        let er_b: f64 = rng.gen_range(0.05..0.40);
        let rates = [("a", rng.gen_range(0.1..10.0), er_a), ("b", rng.gen_range(0.1..20.0), er_b)];
        let nbc = rng.gen_range(0.01..0.04f64).min(er_a.min(er_b));
        let tariff = tariff_from(rules, &rates, rng.gen_range(0.5..20.0), nbc);
        let base = rng.gen_range(20.0..100.0);
        let pv = (0..TOY_STEPS).map(|_| rng.gen_range(0.0..1.3) * base).collect();
        let flex_pct = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
        let delta = [2, 4][rng.gen_range(0..2)];
        Self {
            grid,
            tariff,
            base,
            pv,
            flex_pct,
            delta,
        }
    }

    pub fn load(&self) -> LoadProfile<f64> {
        LoadProfile::new(vec![self.base; TOY_STEPS], self.base).unwrap()
    }

    pub fn pv_profile(&self) -> PvProfile<f64> {
        let max = self.pv.iter().copied().fold(0.0, f64::max);
        PvProfile::new(self.pv.clone(), max).unwrap()
    }

    pub fn flex_spec(&self) -> FlexSpec<f64> {
        FlexSpec::new(self.flex_pct, self.delta as f64 / 4.0).unwrap()
    }

    fn unit(&self) -> f64 {
        GRID_FRACTION * self.base
    }

    fn levels(&self) -> i32 {
        (self.flex_pct / GRID_FRACTION).round() as i32
    }

    fn period_of(&self) -> Vec<usize> {
        (0..TOY_STEPS).map(|t| usize::from(t >= 4)).collect()
    }

    fn rates(&self) -> (f64, [f64; 2], [f64; 2], f64) {
        use flextariff::calendar::PeriodId;
        let cal = self.tariff.calendar();
        let id = |n: &str| cal.period_id(n).unwrap();
        let (a, b): (PeriodId, PeriodId) = (id("a"), id("b"));
        (
            self.tariff.dr_max(),
            [self.tariff.dr_tou(a), self.tariff.dr_tou(b)],
            [self.tariff.er(a), self.tariff.er(b)],
            self.tariff.nbc(),
        )
    }

    /// Largest bill increase from moving every deviation by at most one grid unit.
    pub fn gap_bound(&self) -> f64 {
        let (dr_max, dr_tou, er, _) = self.rates();
        let energy: f64 = self.period_of().iter().map(|&p| 0.25 * er[p]).sum();
        self.unit() * (energy + dr_max + dr_tou[0] + dr_tou[1])
    }

    /// Minimum bill over every deviation vector on the grid that satisfies
    /// the bounds, the recovery windows and the horizon balance.
    /// Depth-first enumeration with a separable lower bound for pruning.
    pub fn brute_force_min(&self) -> (f64, u64) {
        let (dr_max, dr_tou, er, nbc) = self.rates();
        let period = self.period_of();
        let u = self.unit();
        let j = self.levels();
        let net0: Vec<f64> = self.pv.iter().map(|p| self.base - p).collect();
        let energy = |t: usize, k: i32| {
            let n = net0[t] + k as f64 * u;
            let rate = er[period[t]];
            0.25 * (n.max(0.0) * rate + n.min(0.0) * (rate - nbc))
        };
        let min_energy: Vec<f64> = (0..TOY_STEPS)
            .map(|t| (-j..=j).map(|k| energy(t, k)).fold(f64::INFINITY, f64::min))
            .collect();
        let min_net: Vec<f64> = net0.iter().map(|n| n - j as f64 * u).collect();

        struct Search<'a> {
            toy: &'a FlexToy,
            j: i32,
            u: f64,
            net0: &'a [f64],
            period: &'a [usize],
            energy: &'a dyn Fn(usize, i32) -> f64,
            min_energy: &'a [f64],
            min_net: &'a [f64],
            dr_max: f64,
            dr_tou: [f64; 2],
            k: Vec<i32>,
            best: f64,
            leaves: u64,
        }

        impl Search<'_> {
            fn bound(&self, t: usize, energy: f64, max_all: f64, max_p: [f64; 2]) -> f64 {
                let mut e = energy;
                let mut m = max_all;
                let mut mp = max_p;
                for s in t..TOY_STEPS {
                    e += self.min_energy[s];
                    m = m.max(self.min_net[s]);
                    mp[self.period[s]] = mp[self.period[s]].max(self.min_net[s]);
                }
                e + self.dr_max * m.max(0.0) + self.dr_tou[0] * mp[0].max(0.0) + self.dr_tou[1] * mp[1].max(0.0)
            }

            fn go(&mut self, t: usize, sum: i32, energy: f64, max_all: f64, max_p: [f64; 2]) {
                if t == TOY_STEPS {
                    self.leaves += 1;
                    let bill = energy
                        + self.dr_max * max_all.max(0.0)
                        + self.dr_tou[0] * max_p[0].max(0.0)
                        + self.dr_tou[1] * max_p[1].max(0.0);
                    self.best = self.best.min(bill);
                    return;
                }
                if self.bound(t, energy, max_all, max_p) >= self.best {
                    return;
                }
                let remaining = (TOY_STEPS - t - 1) as i32;
                let delta = self.toy.delta;
                for k in -self.j..=self.j {
                    let s = sum + k;
                    if s.abs() > self.j * remaining {
                        continue;
                    }
                    self.k[t] = k;
                    if t + 1 >= delta {
                        let window: i32 = self.k[t + 1 - delta..=t].iter().sum();
                        if window < 0 {
                            continue;
                        }
                    }
                    let n = self.net0[t] + k as f64 * self.u;
                    let mut mp = max_p;
                    mp[self.period[t]] = mp[self.period[t]].max(n);
                    self.go(t + 1, s, energy + (self.energy)(t, k), max_all.max(n), mp);
                }
            }
        }

        let mut search = Search {
            toy: self,
            j,
            u,
            net0: &net0,
            period: &period,
            energy: &energy,
            min_energy: &min_energy,
            min_net: &min_net,
            dr_max,
            dr_tou,
            k: vec![0; TOY_STEPS],
            best: f64::INFINITY,
            leaves: 0,
        };
        search.go(0, 0, 0.0, f64::NEG_INFINITY, [f64::NEG_INFINITY; 2]);
        (search.best, search.leaves)
    }
}
