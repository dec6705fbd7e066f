//! Products, routings, machines, cost rates and scenario files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub type MaterialId = u32;

pub const NUM_MACHINES: usize = 6;
pub const DAYS_PER_MONTH: u32 = 28;
pub const WORKING_DAYS_PER_MONTH: u32 = 20;
pub const MONTHS_PER_YEAR: u32 = 12;
pub const DAYS_PER_YEAR: u32 = DAYS_PER_MONTH * MONTHS_PER_YEAR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    Finished,
    Sub,
    Raw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub id: MaterialId,
    pub kind: MaterialKind,
    /// `(component, quantity per piece)`.
    pub components: Vec<(MaterialId, u32)>,
    /// Machine indices (0 = M1) in processing order.
    pub routing: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftPlan {
    /// Two eight-hour shifts on each working day.
    Ten,
    /// Three eight-hour shifts on each working day.
    Fifteen,
}

impl ShiftPlan {
    pub fn hours_per_working_day(self) -> f64 {
        match self {
            ShiftPlan::Ten => 16.0,
            ShiftPlan::Fifteen => 24.0,
        }
    }
}

/// Maps monthly shift-plan capacities onto a day-level clock.
///
/// A month is four weeks of five working days followed by a two-day weekend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calendar {
    pub days_per_month: u32,
    pub working_days_per_month: u32,
}

impl Default for Calendar {
    fn default() -> Self {
        Self { days_per_month: DAYS_PER_MONTH, working_days_per_month: WORKING_DAYS_PER_MONTH }
    }
}

impl Calendar {
    pub fn monthly_hours(&self, plan: ShiftPlan) -> f64 {
        self.working_days_per_month as f64 * plan.hours_per_working_day()
    }

    pub fn month_of_day(&self, day: u32) -> u32 {
        day / self.days_per_month
    }

    pub fn is_working_day(&self, day: u32) -> bool {
        day % 7 < 5
    }

    /// Calendar day (relative to the month start) of the `k`-th working day.
    pub fn working_day_offset(&self, k: u32) -> u32 {
        (k / 5) * 7 + k % 5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Machine {
    pub index: usize,
    pub name: String,
    pub capacity_ten: f64,
    pub capacity_fifteen: f64,
}

impl Machine {
    pub fn capacity(&self, plan: ShiftPlan) -> f64 {
        match plan {
            ShiftPlan::Ten => self.capacity_ten,
            ShiftPlan::Fifteen => self.capacity_fifteen,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    FlowMany,
    FlowLow,
    JobMany,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [StructureKind::FlowMany, StructureKind::FlowLow, StructureKind::JobMany];

    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::FlowMany => "flow_many",
            StructureKind::FlowLow => "flow_low",
            StructureKind::JobMany => "job_many",
        }
    }

    /// Two-letter prefix of scenario ids, e.g. `f_m`.
    pub fn code(self) -> &'static str {
        match self {
            StructureKind::FlowMany => "f_m",
            StructureKind::FlowLow => "f_l",
            StructureKind::JobMany => "j_m",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StructureKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flow_many" => Ok(StructureKind::FlowMany),
            "flow_low" => Ok(StructureKind::FlowLow),
            "job_many" => Ok(StructureKind::JobMany),
            other => Err(ConfigError::UnknownStructure(other.to_string())),
        }
    }
}

/// The bill of material, routing and machine set of one shop.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub kind: StructureKind,
    /// Sorted by id.
    pub materials: Vec<Material>,
    pub machines: Vec<Machine>,
}

impl Structure {
    pub fn index_of(&self, id: MaterialId) -> Option<usize> {
        self.materials.binary_search_by_key(&id, |m| m.id).ok()
    }

    pub fn material(&self, id: MaterialId) -> &Material {
        &self.materials[self.index_of(id).expect("unknown material id")]
    }

    pub fn finished(&self) -> Vec<MaterialId> {
        self.ids_of(MaterialKind::Finished)
    }

    pub fn ids_of(&self, kind: MaterialKind) -> Vec<MaterialId> {
        self.materials.iter().filter(|m| m.kind == kind).map(|m| m.id).collect()
    }

    /// Operations per machine needed for one piece of `id`, over its whole
    /// bill of material.
    pub fn operations_per_piece(&self, id: MaterialId) -> [u32; NUM_MACHINES] {
        let mut ops = [0u32; NUM_MACHINES];
        self.accumulate_ops(id, 1, &mut ops, 0);
        ops
    }

    fn accumulate_ops(&self, id: MaterialId, qty: u32, ops: &mut [u32; NUM_MACHINES], depth: usize) {
        assert!(depth <= self.materials.len(), "cyclic bill of material");
        let m = self.material(id);
        for &j in &m.routing {
            ops[j] += qty;
        }
        for &(c, q) in &m.components {
            self.accumulate_ops(c, qty * q, ops, depth + 1);
        }
    }

    /// Depth of the longest component chain below `id` (a raw material is 0).
    pub fn depth(&self, id: MaterialId) -> usize {
        self.material(id).components.iter().map(|&(c, _)| 1 + self.depth(c)).max().unwrap_or(0)
    }

    /// Material indices ordered so every parent precedes its components.
    pub fn low_level_order(&self) -> Vec<usize> {
        let n = self.materials.len();
        let mut level = vec![0usize; n];
        // Longest path from any root, relaxed until stable (the graph is a DAG).
        for _ in 0..n {
            let mut changed = false;
            for (i, m) in self.materials.iter().enumerate() {
                for &(c, _) in &m.components {
                    let ci = self.index_of(c).expect("unknown component");
                    if level[ci] < level[i] + 1 {
                        level[ci] = level[i] + 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (level[i], self.materials[i].id));
        order
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for m in &self.materials {
            match m.kind {
                MaterialKind::Raw if !m.routing.is_empty() || !m.components.is_empty() => {
                    return Err(ConfigError::Structure(format!("raw material {} has routing or components", m.id)));
                }
                MaterialKind::Finished | MaterialKind::Sub if m.routing.is_empty() => {
                    return Err(ConfigError::Structure(format!("material {} has no routing", m.id)));
                }
                _ => {}
            }
            if m.routing.iter().any(|&j| j >= self.machines.len()) {
                return Err(ConfigError::Structure(format!("material {} routed to unknown machine", m.id)));
            }
            for &(c, _) in &m.components {
                if self.index_of(c).is_none() {
                    return Err(ConfigError::Structure(format!("material {} uses unknown component {c}", m.id)));
                }
            }
        }
        // Cycle check by depth-first colouring.
        let n = self.materials.len();
        let mut state = vec![0u8; n];
        fn visit(s: &Structure, i: usize, state: &mut [u8]) -> bool {
            match state[i] {
                1 => return false,
                2 => return true,
                _ => {}
            }
            state[i] = 1;
            for &(c, _) in &s.materials[i].components {
                if !visit(s, s.index_of(c).unwrap(), state) {
                    return false;
                }
            }
            state[i] = 2;
            true
        }
        for i in 0..n {
            if !visit(self, i, &mut state) {
                return Err(ConfigError::Structure("bill of material contains a cycle".into()));
            }
        }
        Ok(())
    }
}

fn mat(id: MaterialId, kind: MaterialKind, routing: &[usize], component: Option<MaterialId>) -> Material {
    Material {
        id,
        kind,
        components: component.map(|c| vec![(c, 1)]).unwrap_or_default(),
        routing: routing.to_vec(),
    }
}

/// Builds one of the three preset shops.
pub fn build_structure(kind: StructureKind) -> Structure {
    use MaterialKind::{Finished as F, Raw as R, Sub as S};
    // (material, machines (0-based), component)
    let rows: Vec<(MaterialId, MaterialKind, Vec<usize>, MaterialId)> = match kind {
        StructureKind::FlowMany => vec![
            (10, F, vec![4], 20),
            (11, F, vec![4], 20),
            (12, F, vec![5], 21),
            (13, F, vec![5], 21),
            (14, F, vec![4], 22),
            (15, F, vec![4], 23),
            (16, F, vec![5], 32),
            (17, F, vec![5], 33),
            (20, S, vec![2], 30),
            (21, S, vec![3], 31),
            (22, S, vec![2], 32),
            (23, S, vec![3], 33),
            (30, S, vec![0], 100),
            (31, S, vec![1], 110),
            (32, S, vec![0], 120),
            (33, S, vec![1], 130),
        ],
        StructureKind::JobMany => vec![
            (10, F, vec![4], 20),
            (11, F, vec![4], 20),
            (12, F, vec![5], 21),
            (13, F, vec![5], 21),
            (14, F, vec![4], 22),
            (15, F, vec![4], 22),
            (16, F, vec![5], 23),
            (17, F, vec![5], 23),
            (20, S, vec![2], 30),
            (21, S, vec![3], 31),
            (22, S, vec![5, 3], 32),
            (23, S, vec![0, 3], 33),
            (30, S, vec![0], 100),
            (31, S, vec![1], 110),
            (32, S, vec![0, 2], 120),
            (33, S, vec![1, 2], 130),
        ],
        StructureKind::FlowLow => vec![
            (10, F, vec![4], 20),
            (11, F, vec![4], 20),
            (12, F, vec![5], 21),
            (13, F, vec![5], 21),
            (20, S, vec![2], 30),
            (21, S, vec![3], 31),
            (22, S, vec![2], 32),
            (23, S, vec![3], 33),
            (30, S, vec![0], 100),
            (31, S, vec![1], 110),
            (32, S, vec![0], 120),
            (33, S, vec![1], 130),
        ],
    };
    let mut materials: Vec<Material> =
        rows.into_iter().map(|(id, k, r, c)| mat(id, k, &r, Some(c))).collect();
    for raw in [100, 110, 120, 130] {
        materials.push(mat(raw, R, &[], None));
    }
    materials.sort_by_key(|m| m.id);
    let cal = Calendar::default();
    let machines = (0..NUM_MACHINES)
        .map(|j| Machine {
            index: j,
            name: format!("M{}", j + 1),
            capacity_ten: cal.monthly_hours(ShiftPlan::Ten),
            capacity_fifteen: cal.monthly_hours(ShiftPlan::Fifteen),
        })
        .collect();
    Structure { kind, materials, machines }
}

/// Target machine hours per month for a shop load in shifts per day.
pub fn target_hours(rho: f64) -> f64 {
    rho * 8.0 * WORKING_DAYS_PER_MONTH as f64
}

/// Uniform per-operation processing time for each machine so every machine
/// carries `target_hours(rho)` at the average monthly demand.
pub fn calibrate_processing_times(
    structure: &Structure,
    average_demand: &BTreeMap<MaterialId, f64>,
    rho: f64,
) -> Result<[f64; NUM_MACHINES], ConfigError> {
    let mut piece_ops = [0.0; NUM_MACHINES];
    for (&p, &d) in average_demand {
        let ops = structure.operations_per_piece(p);
        for j in 0..NUM_MACHINES {
            piece_ops[j] += d * ops[j] as f64;
        }
    }
    let target = target_hours(rho);
    let mut a = [0.0; NUM_MACHINES];
    for j in 0..NUM_MACHINES {
        if piece_ops[j] <= 0.0 {
            return Err(ConfigError::Structure(format!("machine M{} carries no operations", j + 1)));
        }
        a[j] = target / piece_ops[j];
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandPattern {
    Constant,
    Seasonal,
}

impl DemandPattern {
    pub fn code(self) -> &'static str {
        match self {
            DemandPattern::Constant => "c",
            DemandPattern::Seasonal => "s",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DemandPattern::Constant => "constant",
            DemandPattern::Seasonal => "seasonal",
        }
    }
}

/// Placement of the seasonal sinusoid within the year.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeasonPhase {
    /// Month 1 at the base level, trough in month 4, peak in month 10.
    #[default]
    Prose,
    /// `base + base/2 * sin(2 pi (t - 5) / 12)`.
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    Med,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Med, Level::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Med => "med",
            Level::High => "high",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Level::Low),
            "med" => Ok(Level::Med),
            "high" => Ok(Level::High),
            other => Err(ConfigError::Invalid { field: "level".into(), message: format!("unknown level {other:?}") }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostRates {
    pub internal: f64,
    pub external: f64,
    pub holding_finished: f64,
    pub holding_sub: f64,
    pub backorder: f64,
}

impl CostRates {
    pub fn from_levels(capacity: Level, backorder: Level) -> Self {
        let (internal, external) = match capacity {
            Level::Low => (50.0, 100.0),
            Level::Med => (100.0, 200.0),
            Level::High => (200.0, 400.0),
        };
        let backorder = match backorder {
            Level::Low => 9.0,
            Level::Med => 19.0,
            Level::High => 99.0,
        };
        Self { internal, external, holding_finished: 1.0, holding_sub: 0.5, backorder }
    }

    pub fn holding(&self, kind: MaterialKind) -> f64 {
        match kind {
            MaterialKind::Finished => self.holding_finished,
            MaterialKind::Sub => self.holding_sub,
            MaterialKind::Raw => 0.0,
        }
    }

    /// Monthly holding rate for the planning model, accrued on calendar days.
    pub fn monthly_holding(&self, kind: MaterialKind) -> f64 {
        self.holding(kind) * DAYS_PER_MONTH as f64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [self.internal, self.external, self.holding_finished, self.holding_sub, self.backorder];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ConfigError::Invalid { field: "cost_rates".into(), message: "rates must be non-negative".into() });
        }
        if self.internal >= self.external {
            return Err(ConfigError::Invalid {
                field: "cost_rates".into(),
                message: "internal rate must be below the external rate".into(),
            });
        }
        Ok(())
    }
}

/// Randomness of the intra-month order stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    Stochastic,
    /// Fixed amounts, fixed lead times and evenly spaced arrivals.
    Degenerate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackorderBasis {
    #[default]
    Piece,
    Order,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalPolicyKind {
    /// Spend the planned external hours evenly over the month, plus late jobs.
    #[default]
    PacedBudget,
    /// Only jobs with negative slack go outside.
    NegativeSlack,
}

pub const ETA_MIN: f64 = 0.5;
pub const ETA_MAX: f64 = 1.0;
pub const ALPHA_MAX: f64 = 0.5;

/// The 26-point planned-utilization grid.
pub fn eta_grid() -> Vec<f64> {
    (0..=25).map(|q| round_grid(0.5 + 0.02 * q as f64)).collect()
}

/// The 11-point forecast-error grid.
pub fn alpha_grid() -> Vec<f64> {
    (0..=10).map(|k| round_grid(0.05 * k as f64)).collect()
}

fn round_grid(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn default_years() -> u32 {
    2
}
fn default_warmup() -> u32 {
    1
}
fn default_reps() -> u32 {
    10
}
fn default_seed() -> u64 {
    20_240_601
}

/// Everything needed to describe one test instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub structure: StructureKind,
    pub demand_pattern: DemandPattern,
    pub rho: f64,
    pub capacity_cost_level: Level,
    pub backorder_cost_level: Level,
    pub alpha: f64,
    pub eta: f64,
    #[serde(default = "default_years")]
    pub years: u32,
    #[serde(default = "default_warmup")]
    pub warmup_years: u32,
    #[serde(default = "default_reps")]
    pub replications: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub season_phase: SeasonPhase,
    #[serde(default)]
    pub noise: NoiseMode,
    #[serde(default)]
    pub backorder_basis: BackorderBasis,
    #[serde(default)]
    pub external_policy: ExternalPolicyKind,
    /// Safety stock of sub-materials as a fraction of one month's demand.
    #[serde(default)]
    pub sub_safety_stock: f64,
}

impl ScenarioConfig {
    /// The basic scenario: flow shop, many products, constant demand and
    /// medium load and cost levels.
    pub fn basic() -> Self {
        Self {
            structure: StructureKind::FlowMany,
            demand_pattern: DemandPattern::Constant,
            rho: 2.5,
            capacity_cost_level: Level::Med,
            backorder_cost_level: Level::Med,
            alpha: 0.0,
            eta: 0.96,
            years: default_years(),
            warmup_years: default_warmup(),
            replications: 3,
            seed: default_seed(),
            season_phase: SeasonPhase::default(),
            noise: NoiseMode::default(),
            backorder_basis: BackorderBasis::default(),
            external_policy: ExternalPolicyKind::default(),
            sub_safety_stock: 0.0,
        }
    }

    /// Short id such as `f_m_c`, extended with load and cost levels when
    /// they differ from the medium setting.
    pub fn scenario_id(&self) -> String {
        let mut id = format!("{}_{}", self.structure.code(), self.demand_pattern.code());
        let medium = (self.rho - 2.5).abs() < 1e-12
            && self.capacity_cost_level == Level::Med
            && self.backorder_cost_level == Level::Med;
        if !medium {
            id.push_str(&format!(
                "_r{}_{}_{}",
                self.rho,
                self.capacity_cost_level.as_str(),
                self.backorder_cost_level.as_str()
            ));
        }
        id
    }

    pub fn cost_rates(&self) -> CostRates {
        CostRates::from_levels(self.capacity_cost_level, self.backorder_cost_level)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |field: &str, value: f64, ok: bool, allowed: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Range { field: field.to_string(), value, allowed: allowed.to_string() })
            }
        };
        range("eta", self.eta, self.eta >= ETA_MIN - 1e-12 && self.eta <= ETA_MAX + 1e-12, "[0.5, 1.0]")?;
        range("alpha", self.alpha, self.alpha >= 0.0 && self.alpha <= ALPHA_MAX + 1e-12, "[0, 0.5]")?;
        range("rho", self.rho, self.rho > 0.0 && self.rho <= 3.0, "(0, 3]")?;
        range(
            "sub_safety_stock",
            self.sub_safety_stock,
            self.sub_safety_stock >= 0.0 && self.sub_safety_stock.is_finite(),
            ">= 0",
        )?;
        if self.replications == 0 {
            return Err(ConfigError::Range {
                field: "replications".into(),
                value: 0.0,
                allowed: ">= 1".into(),
            });
        }
        if self.years == 0 || self.warmup_years >= self.years {
            return Err(ConfigError::Invalid {
                field: "warmup_years".into(),
                message: format!("warmup of {} years leaves nothing of a {}-year run", self.warmup_years, self.years),
            });
        }
        self.cost_rates().validate()
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_sizes() {
        let count = |s: &Structure, k| s.ids_of(k).len();
        let fm = build_structure(StructureKind::FlowMany);
        assert_eq!((count(&fm, MaterialKind::Finished), count(&fm, MaterialKind::Sub), count(&fm, MaterialKind::Raw)), (8, 8, 4));
        let fl = build_structure(StructureKind::FlowLow);
        assert_eq!(fl.finished(), vec![10, 11, 12, 13]);
        assert_eq!((count(&fl, MaterialKind::Sub), count(&fl, MaterialKind::Raw)), (8, 4));
        for kind in StructureKind::ALL {
            build_structure(kind).validate().unwrap();
        }
    }

    #[test]
    fn table_rows() {
        let fm = build_structure(StructureKind::FlowMany);
        assert_eq!(fm.material(10).routing, vec![4]);
        assert_eq!(fm.material(10).components, vec![(20, 1)]);
        let jm = build_structure(StructureKind::JobMany);
        assert_eq!(jm.material(22).routing, vec![5, 3]);
        assert_eq!(jm.material(22).components, vec![(32, 1)]);
        assert_eq!(jm.material(23).routing, vec![0, 3]);
        assert_eq!(jm.material(32).routing, vec![0, 2]);
        assert_eq!(jm.material(33).routing, vec![1, 2]);
    }

    #[test]
    fn calendar_reproduces_capacities() {
        let cal = Calendar::default();
        assert_eq!(cal.monthly_hours(ShiftPlan::Ten), 320.0);
        assert_eq!(cal.monthly_hours(ShiftPlan::Fifteen), 480.0);
        assert_eq!(cal.working_day_offset(0), 0);
        assert_eq!(cal.working_day_offset(5), 7);
        assert_eq!(cal.working_day_offset(19), 25);
        assert!(!cal.is_working_day(5) && !cal.is_working_day(6) && cal.is_working_day(7));
    }

    #[test]
    fn explosion_depth_is_bounded() {
        for kind in StructureKind::ALL {
            let s = build_structure(kind);
            for p in s.finished() {
                assert!(s.depth(p) <= 3);
            }
        }
    }

    #[test]
    fn low_level_order_puts_parents_first() {
        let s = build_structure(StructureKind::FlowMany);
        let order = s.low_level_order();
        let pos = |id| order.iter().position(|&i| s.materials[i].id == id).unwrap();
        assert!(pos(16) < pos(32));
        assert!(pos(22) < pos(32));
        assert!(pos(14) < pos(22));
    }

    #[test]
    fn cycle_is_rejected() {
        let mut s = build_structure(StructureKind::FlowLow);
        let i = s.index_of(30).unwrap();
        s.materials[i].components = vec![(10, 1)];
        assert!(s.validate().is_err());
    }

    #[test]
    fn grids() {
        let eta = eta_grid();
        assert_eq!(eta.len(), 26);
        assert_eq!(eta[0], 0.5);
        assert_eq!(eta[17], 0.84);
        assert_eq!(eta[25], 1.0);
        let alpha = alpha_grid();
        assert_eq!(alpha.len(), 11);
        assert_eq!(alpha[5], 0.25);
    }
}
