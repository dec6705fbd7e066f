//! A scenario resolved into concrete shop data: calibrated processing times,
//! cost rates and forecasts.

use std::collections::BTreeMap;

use crate::app::{AppInput, PLANNING_HORIZON};
use crate::demand::{base_forecast, forecast_value};
use crate::error::ConfigError;
use crate::scenario::{
    build_structure, calibrate_processing_times, Calendar, CostRates, MaterialId, MaterialKind, ScenarioConfig,
    ShiftPlan, Structure, NUM_MACHINES,
};

#[derive(Clone, Debug)]
pub struct Plant {
    pub config: ScenarioConfig,
    pub structure: Structure,
    pub calendar: Calendar,
    pub rates: CostRates,
    /// Hours per piece for every operation on each machine.
    pub op_hours: [f64; NUM_MACHINES],
    pub products: Vec<MaterialId>,
    /// `product_hours[p][j]` over the product's whole bill of material.
    pub product_hours: Vec<Vec<f64>>,
}

impl Plant {
    pub fn new(config: &ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let structure = build_structure(config.structure);
        structure.validate()?;
        let products = structure.finished();
        let average: BTreeMap<MaterialId, f64> = products.iter().map(|&p| (p, base_forecast(p))).collect();
        let op_hours = calibrate_processing_times(&structure, &average, config.rho)?;
        let product_hours = products
            .iter()
            .map(|&p| {
                let ops = structure.operations_per_piece(p);
                (0..NUM_MACHINES).map(|j| ops[j] as f64 * op_hours[j]).collect()
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            structure,
            calendar: Calendar::default(),
            rates: config.cost_rates(),
            op_hours,
            products,
            product_hours,
        })
    }

    /// Forecast for a 0-based absolute month.
    pub fn forecast(&self, product: MaterialId, month: u32) -> f64 {
        forecast_value(self.config.demand_pattern, self.config.season_phase, product, month % 12 + 1)
    }

    /// Planning-model input for the twelve months starting at `month`.
    pub fn app_input(&self, month: u32, initial_inventory: Vec<f64>) -> AppInput {
        AppInput {
            products: self.products.clone(),
            a: self.product_hours.clone(),
            forecast: self
                .products
                .iter()
                .map(|&p| (0..PLANNING_HORIZON as u32).map(|t| self.forecast(p, month + t)).collect())
                .collect(),
            initial_inventory,
            eta: self.config.eta,
            internal_rate: self.rates.internal,
            external_rate: self.rates.external,
            monthly_holding: vec![self.rates.monthly_holding(MaterialKind::Finished); self.products.len()],
            capacity_ten: self.calendar.monthly_hours(ShiftPlan::Ten),
            capacity_fifteen: self.calendar.monthly_hours(ShiftPlan::Fifteen),
            horizon: PLANNING_HORIZON,
        }
    }

    /// Safety stock per material: a tenth of the monthly average for
    /// finished products, the configured fraction for sub-materials.
    pub fn safety_stock(&self, id: MaterialId) -> i64 {
        let m = self.structure.material(id);
        match m.kind {
            MaterialKind::Finished => (0.1 * 12.0 * base_forecast(id) / 12.0).round() as i64,
            MaterialKind::Sub => {
                let monthly: f64 = self
                    .products
                    .iter()
                    .map(|&p| base_forecast(p) * self.uses(p, id) as f64)
                    .sum();
                (self.config.sub_safety_stock * monthly).round() as i64
            }
            MaterialKind::Raw => 0,
        }
    }

    /// Pieces of `component` inside one piece of `parent`.
    pub fn uses(&self, parent: MaterialId, component: MaterialId) -> u32 {
        if parent == component {
            return 1;
        }
        self.structure
            .material(parent)
            .components
            .iter()
            .map(|&(c, q)| q * self.uses(c, component))
            .sum()
    }
}
