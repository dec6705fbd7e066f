//! Discrete-event simulation of the shop under the planning hierarchy.
//!
//! One run owns the whole chain: monthly customer orders, rolling aggregate
//! plans, daily MPS/MRP, job release, MEDD dispatching on shift calendars,
//! external overflow and customer deliveries.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{self, Write};

use crate::app::{default_app_options, solve_app, AppInput, AppSolution};
use crate::demand::{
    draw_forecast_error, generate_month_orders, order_amount_moments, order_rate, CustomerOrder, MomentLogNormal,
    MEAN_LEAD_TIME, VAR_LEAD_TIME,
};
use crate::error::SimError;
use crate::ledger::{finalize_run, CostLedger, EvalWindow, KpiReport};
use crate::mrp::{compute_mps, disaggregate_program, run_mrp, MrpParams, MrpState, OrderState, ProductionOrder};
use crate::plant::Plant;
use crate::rng::{stream, Purpose};
use crate::scenario::{ExternalPolicyKind, MaterialId, MaterialKind, ScenarioConfig, ShiftPlan, NUM_MACHINES};

/// Months (within a year) at which the aggregate plan is recomputed.
pub const REPLAN_MONTHS: [u32; 3] = [0, 4, 8];

const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EventKind {
    Completion { machine: usize, token: u64 },
    ExternalDone { job: usize },
    ShiftEnd { machine: usize },
    DayStart { day: u32 },
    ShiftStart { machine: usize },
    Arrival { order: usize },
    Due { order: usize },
}

impl EventKind {
    fn rank(self) -> u8 {
        match self {
            EventKind::Completion { .. } | EventKind::ExternalDone { .. } => 0,
            EventKind::ShiftEnd { .. } => 1,
            EventKind::DayStart { .. } => 2,
            EventKind::ShiftStart { .. } => 3,
            EventKind::Arrival { .. } => 4,
            EventKind::Due { .. } => 5,
        }
    }

    fn name(self) -> &'static str {
        match self {
            EventKind::Completion { .. } => "completion",
            EventKind::ExternalDone { .. } => "external_done",
            EventKind::ShiftEnd { .. } => "shift_end",
            EventKind::DayStart { .. } => "day_start",
            EventKind::ShiftStart { .. } => "shift_start",
            EventKind::Arrival { .. } => "arrival",
            EventKind::Due { .. } => "due",
        }
    }

    fn ids(self) -> (i64, i64) {
        match self {
            EventKind::Completion { machine, token } => (machine as i64 + 1, token as i64),
            EventKind::ExternalDone { job } => (job as i64, -1),
            EventKind::ShiftEnd { machine } | EventKind::ShiftStart { machine } => (machine as i64 + 1, -1),
            EventKind::DayStart { day } => (day as i64, -1),
            EventKind::Arrival { order } | EventKind::Due { order } => (order as i64, -1),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    rank: u8,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // Reversed: BinaryHeap pops the earliest (time, rank, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.rank.cmp(&self.rank))
            .then(other.seq.cmp(&self.seq))
    }
}

/// One row of the optional event trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub event: &'static str,
    pub a: i64,
    pub b: i64,
}

pub fn write_trace_csv<W: Write>(out: &mut W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(out, "time,event,id_a,id_b")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.time, r.event, r.a, r.b)?;
    }
    Ok(())
}

/// What an overflow policy sees when a job waits for machine `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffloadContext {
    pub now: f64,
    /// Hours left at the current operation.
    pub remaining_hours: f64,
    pub planned_end: f64,
    pub budget: f64,
    pub budget_used: f64,
    /// Elapsed part of the current month, in `[0, 1)`.
    pub month_elapsed: f64,
}

impl OffloadContext {
    pub fn slack_days(&self) -> f64 {
        self.planned_end - self.now - self.remaining_hours / 24.0
    }

    pub fn budget_left(&self) -> f64 {
        (self.budget - self.budget_used).max(0.0)
    }
}

pub trait OffloadPolicy: Send + Sync {
    fn offload(&self, ctx: &OffloadContext) -> bool;
}

/// Late jobs go outside while the month's budget covers them.
#[derive(Clone, Copy, Debug, Default)]
pub struct NegativeSlack;

impl OffloadPolicy for NegativeSlack {
    fn offload(&self, ctx: &OffloadContext) -> bool {
        ctx.slack_days() < 0.0 && ctx.budget_left() + EPS >= ctx.remaining_hours
    }
}

/// Spends the month's budget at an even pace, and late jobs may draw on
/// whatever is left.
#[derive(Clone, Copy, Debug)]
pub struct PacedBudget {
    /// How far ahead of the even pace spending may run, as a month fraction.
    pub lead: f64,
}

impl Default for PacedBudget {
    fn default() -> Self {
        Self { lead: 0.05 }
    }
}

impl OffloadPolicy for PacedBudget {
    fn offload(&self, ctx: &OffloadContext) -> bool {
        if ctx.remaining_hours <= 0.0 || ctx.budget_left() + EPS < ctx.remaining_hours {
            return false;
        }
        if ctx.slack_days() < 0.0 {
            return true;
        }
        ctx.budget_used + ctx.remaining_hours <= ctx.budget * (ctx.month_elapsed + self.lead) + EPS
    }
}

pub fn policy_for(kind: ExternalPolicyKind) -> Box<dyn OffloadPolicy> {
    match kind {
        ExternalPolicyKind::PacedBudget => Box::new(PacedBudget::default()),
        ExternalPolicyKind::NegativeSlack => Box::new(NegativeSlack),
    }
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    pub trace: bool,
    /// Check material conservation after every event.
    pub check_invariants: bool,
}

/// One aggregate plan computed during a run.
#[derive(Clone, Debug)]
pub struct PlanRecord {
    pub day: u32,
    pub input: AppInput,
    pub solution: AppSolution,
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub report: KpiReport,
    pub plans: Vec<PlanRecord>,
    pub trace: Vec<TraceRow>,
    pub orders: Vec<CustomerOrder>,
    pub external_hours: f64,
    pub invariant_checks: u64,
    /// Stock per material at each day start, recorded when tracing.
    pub daily_stock: Vec<Vec<i64>>,
    /// Finished production orders with their completion time, recorded
    /// when tracing.
    pub completions: Vec<(ProductionOrder, f64)>,
}

#[derive(Clone, Debug)]
struct Job {
    order: usize,
    mat: usize,
    qty: i64,
    op: usize,
    remaining: f64,
    planned_end: f64,
    released: f64,
}

#[derive(Clone, Debug, Default)]
struct MachineState {
    queue: Vec<usize>,
    current: Option<usize>,
    running_since: Option<f64>,
    on_shift: bool,
    token: u64,
    busy: f64,
    available: f64,
}

struct ActivePlan {
    start_month: u32,
    start_day: u32,
    program: Vec<Vec<i64>>,
    l0: Vec<f64>,
    l: Vec<Vec<f64>>,
    solution: AppSolution,
}

struct Sim<'a> {
    plant: &'a Plant,
    cfg: &'a ScenarioConfig,
    seed: u64,
    opts: &'a SimOptions,
    policy: Box<dyn OffloadPolicy>,
    params: MrpParams,
    window: EvalWindow,
    end: f64,

    now: f64,
    seq: u64,
    events: BinaryHeap<Event>,

    machines: Vec<MachineState>,
    jobs: Vec<Job>,
    free_jobs: Vec<usize>,
    prod_orders: Vec<ProductionOrder>,
    waiting: Vec<usize>,
    open_prod: Vec<usize>,

    stock: Vec<i64>,
    initial: Vec<i64>,
    produced: Vec<i64>,
    consumed: Vec<i64>,
    delivered: Vec<i64>,
    holding_rate: Vec<f64>,
    stock_value: f64,
    last_accrual: f64,

    customer: Vec<CustomerOrder>,
    open_customer: Vec<Vec<usize>>,

    plan: Option<ActivePlan>,
    plans: Vec<PlanRecord>,
    budget_used: [f64; NUM_MACHINES],
    external_hours: f64,

    ledger: CostLedger,
    trace: Vec<TraceRow>,
    checks: u64,
    daily_stock: Vec<Vec<i64>>,
    completions: Vec<(ProductionOrder, f64)>,
}

/// Runs one replication of `cfg` with the given stream seed.
pub fn simulate(plant: &Plant, seed: u64, opts: &SimOptions) -> Result<SimOutput, SimError> {
    let cfg = &plant.config;
    cfg.validate()?;
    let days_per_year = plant.calendar.days_per_month as f64 * 12.0;
    let end = cfg.years as f64 * days_per_year;
    let window = EvalWindow::new(cfg.warmup_years as f64 * days_per_year, end);
    let s = &plant.structure;
    let n = s.materials.len();
    let mut sim = Sim {
        plant,
        cfg,
        seed,
        opts,
        policy: policy_for(cfg.external_policy),
        params: MrpParams {
            safety_stock: s.materials.iter().map(|m| (m.id, plant.safety_stock(m.id))).collect(),
            shop_calendar: Some(plant.calendar),
            ..MrpParams::default()
        },
        window,
        end,
        now: 0.0,
        seq: 0,
        events: BinaryHeap::new(),
        machines: vec![MachineState::default(); NUM_MACHINES],
        jobs: Vec::new(),
        free_jobs: Vec::new(),
        prod_orders: Vec::new(),
        waiting: Vec::new(),
        open_prod: Vec::new(),
        stock: vec![0; n],
        initial: vec![0; n],
        produced: vec![0; n],
        consumed: vec![0; n],
        delivered: vec![0; n],
        holding_rate: s.materials.iter().map(|m| plant.rates.holding(m.kind)).collect(),
        stock_value: 0.0,
        last_accrual: 0.0,
        customer: Vec::new(),
        open_customer: vec![Vec::new(); plant.products.len()],
        plan: None,
        plans: Vec::new(),
        budget_used: [0.0; NUM_MACHINES],
        external_hours: 0.0,
        ledger: CostLedger::default(),
        trace: Vec::new(),
        checks: 0,
        daily_stock: Vec::new(),
        completions: Vec::new(),
    };
    for (i, m) in s.materials.iter().enumerate() {
        if m.kind != MaterialKind::Raw {
            sim.stock[i] = plant.safety_stock(m.id);
        }
        sim.initial[i] = sim.stock[i];
    }
    sim.stock_value = sim.stock.iter().zip(&sim.holding_rate).map(|(&q, &r)| q as f64 * r).sum();
    sim.run()?;
    Ok(sim.finish())
}

/// Convenience wrapper building the plant from a config.
pub fn simulate_config(cfg: &ScenarioConfig, seed: u64, opts: &SimOptions) -> Result<SimOutput, SimError> {
    let plant = Plant::new(cfg)?;
    simulate(&plant, seed, opts)
}

impl<'a> Sim<'a> {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Event { time, rank: kind.rank(), seq: self.seq, kind });
    }

    fn mat_index(&self, id: MaterialId) -> usize {
        self.plant.structure.index_of(id).expect("known material")
    }

    fn product_slot(&self, id: MaterialId) -> usize {
        self.plant.products.iter().position(|&p| p == id).expect("finished product")
    }

    fn days_per_month(&self) -> u32 {
        self.plant.calendar.days_per_month
    }

    fn month_of(&self, t: f64) -> u32 {
        (t / self.days_per_month() as f64).floor() as u32
    }

    fn run(&mut self) -> Result<(), SimError> {
        self.schedule(0.0, EventKind::DayStart { day: 0 });
        while let Some(ev) = self.events.pop() {
            if ev.time >= self.end {
                break;
            }
            if ev.time + EPS < self.now {
                return Err(SimError::Invariant { time: ev.time, message: "clock moved backwards".into() });
            }
            self.accrue_holding(ev.time);
            self.now = ev.time;
            if self.opts.trace {
                let (a, b) = ev.kind.ids();
                self.trace.push(TraceRow { time: ev.time, event: ev.kind.name(), a, b });
            }
            match ev.kind {
                EventKind::DayStart { day } => self.day_start(day)?,
                EventKind::ShiftStart { machine } => {
                    self.machines[machine].on_shift = true;
                    self.try_start(machine);
                }
                EventKind::ShiftEnd { machine } => self.shift_end(machine),
                EventKind::Completion { machine, token } => {
                    if self.machines[machine].token == token && self.machines[machine].running_since.is_some() {
                        self.complete_internal(machine);
                    }
                }
                EventKind::ExternalDone { job } => self.operation_done(job),
                EventKind::Arrival { order } => {
                    let slot = self.product_slot(self.customer[order].product);
                    self.open_customer[slot].push(order);
                }
                EventKind::Due { order } => {
                    let slot = self.product_slot(self.customer[order].product);
                    self.fulfill(slot);
                }
            }
            if self.opts.check_invariants {
                self.check_conservation()?;
            }
        }
        self.accrue_holding(self.end);
        self.now = self.end;
        for j in 0..NUM_MACHINES {
            if let Some(since) = self.machines[j].running_since {
                self.machines[j].busy += 24.0 * self.window.overlap(since, self.end);
            }
        }
        Ok(())
    }

    fn finish(self) -> SimOutput {
        let busy: [f64; NUM_MACHINES] = std::array::from_fn(|j| self.machines[j].busy);
        let avail: [f64; NUM_MACHINES] = std::array::from_fn(|j| self.machines[j].available);
        let report = finalize_run(
            self.ledger,
            &self.window,
            &self.customer,
            self.cfg.backorder_basis,
            self.plant.rates.backorder,
            &busy,
            &avail,
        );
        SimOutput {
            report,
            plans: self.plans,
            trace: self.trace,
            orders: self.customer,
            external_hours: self.external_hours,
            invariant_checks: self.checks,
            daily_stock: self.daily_stock,
            completions: self.completions,
        }
    }

    fn accrue_holding(&mut self, to: f64) {
        let from = self.last_accrual;
        if to > from {
            self.ledger.accrue_holding(&self.window, self.stock_value, from, to);
            self.last_accrual = to;
        }
    }

    fn change_stock(&mut self, mat: usize, delta: i64) {
        self.stock[mat] += delta;
        self.stock_value += delta as f64 * self.holding_rate[mat];
    }

    fn check_conservation(&mut self) -> Result<(), SimError> {
        self.checks += 1;
        for i in 0..self.stock.len() {
            let expect = self.initial[i] + self.produced[i] - self.consumed[i] - self.delivered[i];
            if self.stock[i] != expect || self.stock[i] < 0 {
                return Err(SimError::Invariant {
                    time: self.now,
                    message: format!(
                        "material {}: stock {} vs initial {} + produced {} - consumed {} - delivered {}",
                        self.plant.structure.materials[i].id,
                        self.stock[i],
                        self.initial[i],
                        self.produced[i],
                        self.consumed[i],
                        self.delivered[i]
                    ),
                });
            }
        }
        Ok(())
    }

    // ---- days, months and plans ----

    fn day_start(&mut self, day: u32) -> Result<(), SimError> {
        if self.opts.trace {
            self.daily_stock.push(self.stock.clone());
        }
        let dpm = self.days_per_month();
        if day % dpm == 0 {
            let month = day / dpm;
            self.budget_used = [0.0; NUM_MACHINES];
            if REPLAN_MONTHS.contains(&(month % 12)) || self.plan.is_none() {
                self.replan(day, month)?;
            }
            self.generate_orders(month);
        }
        if day + 1 < self.end.ceil() as u32 {
            self.schedule(day as f64 + 1.0, EventKind::DayStart { day: day + 1 });
        }
        if !self.plant.calendar.is_working_day(day) {
            return Ok(());
        }
        let month = day / dpm;
        for j in 0..NUM_MACHINES {
            let shift = self.shift_plan(month, j);
            let hours = shift.hours_per_working_day();
            let start = day as f64;
            self.ledger.accrue_internal(&self.window, hours, self.plant.rates.internal, start);
            if start >= self.window.start && start < self.window.end {
                self.machines[j].available += hours;
            }
            self.schedule(start, EventKind::ShiftStart { machine: j });
            self.schedule(start + hours / 24.0, EventKind::ShiftEnd { machine: j });
        }
        self.plan_materials(day);
        self.release_ready();
        self.review_queues();
        Ok(())
    }

    fn shift_plan(&self, month: u32, j: usize) -> ShiftPlan {
        let plan = self.plan.as_ref().expect("plan exists after the first day");
        let t = (month - plan.start_month) as usize;
        let t = t.min(plan.solution.w.len() - 1);
        plan.solution.shift_plan(t, j)
    }

    fn budget(&self, month: u32, j: usize) -> f64 {
        let Some(plan) = self.plan.as_ref() else { return 0.0 };
        let t = month.saturating_sub(plan.start_month) as usize;
        plan.solution.e.get(t).map_or(0.0, |row| row[j])
    }

    fn replan(&mut self, day: u32, month: u32) -> Result<(), SimError> {
        // Inventory the plan may spend: stock above safety stock, net of
        // orders already due.
        let l0: Vec<f64> = (0..self.plant.products.len()).map(|slot| self.net_inventory(slot) as f64).collect();
        let input = self.plant.app_input(month, l0.clone());
        let solution = solve_app(&input, &default_app_options()).map_err(|source| SimError::Plan { day, source })?;
        let program = solution.x.iter().map(|xs| disaggregate_program(xs, &self.plant.calendar)).collect();
        self.plans.push(PlanRecord { day, input, solution: solution.clone() });
        self.plan = Some(ActivePlan {
            start_month: month,
            start_day: day,
            program,
            l0,
            l: solution.l.clone(),
            solution,
        });
        Ok(())
    }

    fn net_inventory(&self, slot: usize) -> i64 {
        let p = self.plant.products[slot];
        let backlog: i64 = self.open_customer[slot]
            .iter()
            .map(|&o| &self.customer[o])
            .filter(|c| c.due <= self.now + EPS)
            .map(|c| c.amount as i64)
            .sum();
        self.stock[self.mat_index(p)] - self.params.safety_stock_of(p) - backlog
    }

    fn generate_orders(&mut self, month: u32) {
        let plant = self.plant;
        let lead = MomentLogNormal::new(MEAN_LEAD_TIME, VAR_LEAD_TIME);
        for &p in &plant.products {
            let forecast = plant.forecast(p, month);
            let mut err_rng = stream(self.seed, Purpose::ForecastError, p, month);
            let demand = forecast + draw_forecast_error(forecast, self.cfg.alpha, &mut err_rng);
            let (mean, var) = order_amount_moments(p);
            let amount = MomentLogNormal::new(mean, var);
            let mut rng = stream(self.seed, Purpose::Orders, p, month);
            let orders = generate_month_orders(
                p,
                month,
                order_rate(demand, mean),
                &amount,
                &lead,
                self.cfg.noise,
                self.customer.len(),
                &mut rng,
            );
            for o in orders {
                let (id, arrival, due) = (o.id, o.arrival, o.due);
                self.customer.push(o);
                self.schedule(arrival, EventKind::Arrival { order: id });
                self.schedule(due, EventKind::Due { order: id });
            }
        }
    }

    /// Planned finished inventory on `day`, interpolated within the month.
    fn inventory_target(&self, slot: usize, day: u32) -> i64 {
        let plan = self.plan.as_ref().expect("active plan");
        let dpm = self.days_per_month();
        let rel = day - plan.start_day;
        let t = (rel / dpm) as usize;
        let frac = (rel % dpm) as f64 / dpm as f64;
        let l = &plan.l[slot];
        if t >= l.len() {
            return l.last().copied().unwrap_or(0.0).round() as i64;
        }
        let prev = if t == 0 { plan.l0[slot] } else { l[t - 1] };
        (prev + frac * (l[t] - prev)).round() as i64
    }

    fn plan_materials(&mut self, day: u32) {
        let h = self.params.mps_horizon;
        let plan = self.plan.as_ref().expect("active plan");
        let rel = (day - plan.start_day) as usize;
        let mut mps = BTreeMap::new();
        for (slot, &p) in self.plant.products.iter().enumerate() {
            let prog = &plan.program[slot];
            let program: Vec<i64> = (0..h).map(|k| prog.get(rel + k).copied().unwrap_or(0)).collect();
            let mut demand = vec![0i64; h];
            let mut backlog = 0;
            for &o in &self.open_customer[slot] {
                let c = &self.customer[o];
                let k = (c.due.floor() as i64 - day as i64).max(0) as usize;
                if k < h {
                    demand[k] += c.amount as i64;
                }
                if c.due <= self.now + EPS {
                    backlog += c.amount as i64;
                }
            }
            // Planned inventory is net of orders already due, which still
            // have to leave the store.
            let target = self.inventory_target(slot, day) + backlog;
            mps.insert(p, compute_mps(&program, &demand, target));
        }
        let on_hand: BTreeMap<MaterialId, i64> =
            self.plant.structure.materials.iter().zip(&self.stock).map(|(m, &q)| (m.id, q)).collect();
        let open: Vec<ProductionOrder> = self.open_prod.iter().map(|&i| self.prod_orders[i].clone()).collect();
        let state = MrpState { today: day, mps: &mps, on_hand: &on_hand, open_orders: &open };
        let planned = run_mrp(&self.plant.structure, &self.params, &state, self.prod_orders.len());
        for o in planned.into_iter().filter(|o| o.start <= day) {
            let id = self.prod_orders.len();
            let o = ProductionOrder { id, ..o };
            self.prod_orders.push(o);
            self.waiting.push(id);
            self.open_prod.push(id);
        }
    }

    // ---- release, dispatch, processing ----

    /// Releases waiting orders whose components are in stock, earliest due
    /// first per component; an order that cannot be covered blocks later
    /// orders on the same component.
    fn release_ready(&mut self) {
        if self.waiting.is_empty() {
            return;
        }
        let s = &self.plant.structure;
        let mut order = self.waiting.clone();
        order.sort_by_key(|&i| (self.prod_orders[i].due, i));
        let mut blocked: Vec<MaterialId> = Vec::new();
        let mut released = Vec::new();
        for i in order {
            let po = &self.prod_orders[i];
            if po.start as f64 > self.now + EPS {
                continue;
            }
            let comps: Vec<(usize, i64, bool)> = s
                .material(po.material)
                .components
                .iter()
                .map(|&(c, q)| {
                    let idx = self.mat_index(c);
                    (idx, q as i64 * po.quantity, s.materials[idx].kind == MaterialKind::Raw)
                })
                .collect();
            let ids: Vec<MaterialId> = comps.iter().map(|&(c, _, _)| s.materials[c].id).collect();
            if ids.iter().any(|c| blocked.contains(c)) {
                continue;
            }
            if comps.iter().all(|&(c, need, raw)| raw || self.stock[c] >= need) {
                for &(c, need, raw) in &comps {
                    if !raw {
                        self.change_stock(c, -need);
                        self.consumed[c] += need;
                    }
                }
                released.push(i);
            } else {
                blocked.extend(ids);
            }
        }
        if released.is_empty() {
            return;
        }
        self.waiting.retain(|i| !released.contains(i));
        for i in released {
            self.prod_orders[i].state = OrderState::Released;
            let po = &self.prod_orders[i];
            let job = Job {
                order: i,
                mat: self.mat_index(po.material),
                qty: po.quantity,
                op: 0,
                remaining: 0.0,
                planned_end: po.due as f64,
                released: self.now,
            };
            let id = match self.free_jobs.pop() {
                Some(slot) => {
                    self.jobs[slot] = job;
                    slot
                }
                None => {
                    self.jobs.push(job);
                    self.jobs.len() - 1
                }
            };
            self.enter_operation(id);
        }
    }

    fn routing(&self, job: usize) -> &[usize] {
        &self.plant.structure.materials[self.jobs[job].mat].routing
    }

    fn enter_operation(&mut self, job: usize) {
        let machine = self.routing(job)[self.jobs[job].op];
        let hours = self.jobs[job].qty as f64 * self.plant.op_hours[machine];
        self.jobs[job].remaining = hours;
        let order = self.jobs[job].order;
        self.prod_orders[order].state = OrderState::InProcess { operation: self.jobs[job].op };
        if !self.maybe_offload(job, machine) {
            self.machines[machine].queue.push(job);
            self.try_start(machine);
        }
    }

    fn offload_context(&self, job: usize, machine: usize) -> OffloadContext {
        let month = self.month_of(self.now);
        let dpm = self.days_per_month() as f64;
        OffloadContext {
            now: self.now,
            remaining_hours: self.jobs[job].remaining,
            planned_end: self.jobs[job].planned_end,
            budget: self.budget(month, machine),
            budget_used: self.budget_used[machine],
            month_elapsed: (self.now - month as f64 * dpm) / dpm,
        }
    }

    fn maybe_offload(&mut self, job: usize, machine: usize) -> bool {
        let ctx = self.offload_context(job, machine);
        if !self.policy.offload(&ctx) {
            return false;
        }
        let hours = self.jobs[job].remaining;
        self.budget_used[machine] += hours;
        self.external_hours += hours;
        self.ledger.accrue_external(&self.window, hours, self.plant.rates.external, self.now);
        self.schedule(self.now + hours / 24.0, EventKind::ExternalDone { job });
        true
    }

    /// Offers every queued job to the overflow policy.
    fn review_queues(&mut self) {
        for j in 0..NUM_MACHINES {
            let queue = std::mem::take(&mut self.machines[j].queue);
            let mut kept = Vec::with_capacity(queue.len());
            let mut by_key = queue.clone();
            by_key.sort_by(|&a, &b| self.medd_cmp(a, b));
            for job in by_key {
                if !self.maybe_offload(job, j) {
                    kept.push(job);
                }
            }
            kept.sort_unstable();
            self.machines[j].queue = kept;
        }
    }

    fn medd_key(&self, job: usize) -> f64 {
        let jb = &self.jobs[job];
        jb.planned_end.max(self.now + jb.remaining / 24.0)
    }

    fn medd_cmp(&self, a: usize, b: usize) -> Ordering {
        self.medd_key(a)
            .total_cmp(&self.medd_key(b))
            .then(self.jobs[a].released.total_cmp(&self.jobs[b].released))
            .then(self.jobs[a].order.cmp(&self.jobs[b].order))
    }

    fn try_start(&mut self, j: usize) {
        let m = &self.machines[j];
        if !m.on_shift || m.running_since.is_some() {
            return;
        }
        let job = match m.current {
            Some(job) => job,
            None => {
                if m.queue.is_empty() {
                    return;
                }
                let (pos, _) = m
                    .queue
                    .iter()
                    .enumerate()
                    .min_by(|(_, &a), (_, &b)| self.medd_cmp(a, b))
                    .expect("non-empty queue");
                let job = self.machines[j].queue.swap_remove(pos);
                self.machines[j].current = Some(job);
                job
            }
        };
        let m = &mut self.machines[j];
        m.running_since = Some(self.now);
        m.token += 1;
        let token = m.token;
        let done = self.now + self.jobs[job].remaining / 24.0;
        self.schedule(done, EventKind::Completion { machine: j, token });
    }

    fn stop_running(&mut self, j: usize) {
        let now = self.now;
        let m = &mut self.machines[j];
        if let Some(since) = m.running_since.take() {
            m.busy += 24.0 * self.window.overlap(since, now);
            let job = m.current.expect("running job");
            self.jobs[job].remaining = (self.jobs[job].remaining - 24.0 * (now - since)).max(0.0);
            m.token += 1;
        }
    }

    fn shift_end(&mut self, j: usize) {
        self.stop_running(j);
        self.machines[j].on_shift = false;
    }

    fn complete_internal(&mut self, j: usize) {
        self.stop_running(j);
        let job = self.machines[j].current.take().expect("completed job");
        self.jobs[job].remaining = 0.0;
        self.try_start(j);
        self.operation_done(job);
    }

    fn operation_done(&mut self, job: usize) {
        self.jobs[job].op += 1;
        if self.jobs[job].op < self.routing(job).len() {
            self.enter_operation(job);
            return;
        }
        let (mat, qty, order) = (self.jobs[job].mat, self.jobs[job].qty, self.jobs[job].order);
        self.free_jobs.push(job);
        self.prod_orders[order].state = OrderState::Finished;
        if self.opts.trace {
            self.completions.push((self.prod_orders[order].clone(), self.now));
        }
        self.open_prod.retain(|&o| o != order);
        self.change_stock(mat, qty);
        self.produced[mat] += qty;
        let m = &self.plant.structure.materials[mat];
        if m.kind == MaterialKind::Finished {
            let slot = self.product_slot(m.id);
            self.fulfill(slot);
        } else {
            self.release_ready();
        }
    }

    /// Ships due orders of one product in due-date order, whole orders only.
    fn fulfill(&mut self, slot: usize) {
        let mat = self.mat_index(self.plant.products[slot]);
        let mut open = std::mem::take(&mut self.open_customer[slot]);
        open.sort_by(|&a, &b| self.customer[a].due.total_cmp(&self.customer[b].due).then(a.cmp(&b)));
        let mut shipped = 0;
        for &o in &open {
            let c = &self.customer[o];
            if c.due > self.now + EPS || (c.amount as i64) > self.stock[mat] {
                break;
            }
            let amount = c.amount as i64;
            self.change_stock(mat, -amount);
            self.delivered[mat] += amount;
            self.customer[o].delivered = Some(self.now);
            shipped += 1;
        }
        open.drain(..shipped);
        self.open_customer[slot] = open;
    }
}

/// Runs a config with its own seed, keeping only the report.
pub fn run_kpis(cfg: &ScenarioConfig, seed: u64) -> Result<KpiReport, SimError> {
    Ok(simulate_config(cfg, seed, &SimOptions::default())?.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(now: f64, rem: f64, end: f64, budget: f64, used: f64, elapsed: f64) -> OffloadContext {
        OffloadContext {
            now,
            remaining_hours: rem,
            planned_end: end,
            budget,
            budget_used: used,
            month_elapsed: elapsed,
        }
    }

    #[test]
    fn negative_slack_rule() {
        let p = NegativeSlack;
        assert!(p.offload(&ctx(10.0, 5.0, 10.0, 64.0, 0.0, 0.5)));
        assert!(!p.offload(&ctx(10.0, 5.0, 10.0, 0.0, 0.0, 0.5)));
        assert!(!p.offload(&ctx(10.0, 5.0, 12.0, 64.0, 0.0, 0.5)));
    }

    #[test]
    fn paced_budget_rule() {
        let p = PacedBudget { lead: 0.0 };
        // Half the month gone, 10 of 100 hours used: room for 40 more.
        assert!(p.offload(&ctx(10.0, 40.0, 30.0, 100.0, 10.0, 0.5)));
        assert!(!p.offload(&ctx(10.0, 41.0, 30.0, 100.0, 10.0, 0.5)));
        // Late jobs may use the rest of the budget.
        assert!(p.offload(&ctx(10.0, 80.0, 10.0, 100.0, 10.0, 0.5)));
        assert!(!p.offload(&ctx(10.0, 91.0, 10.0, 100.0, 10.0, 0.5)));
    }

    #[test]
    fn event_order() {
        let mut h = BinaryHeap::new();
        let kinds = [
            EventKind::Due { order: 0 },
            EventKind::DayStart { day: 1 },
            EventKind::Completion { machine: 0, token: 1 },
            EventKind::ShiftStart { machine: 0 },
        ];
        for (seq, k) in kinds.into_iter().enumerate() {
            h.push(Event { time: 1.0, rank: k.rank(), seq: seq as u64, kind: k });
        }
        h.push(Event { time: 0.5, rank: 5, seq: 9, kind: EventKind::Due { order: 1 } });
        let order: Vec<&str> = std::iter::from_fn(|| h.pop()).map(|e| e.kind.name()).collect();
        assert_eq!(order, ["due", "completion", "day_start", "shift_start", "due"]);
    }
}
