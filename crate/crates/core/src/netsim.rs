//! Manhattan-grid downlink coverage simulation.
//!
//! Rooftop cells sit at street intersections on a rectangular block
//! lattice, four per site, one facing each street direction. Every street
//! sample point is evaluated against every cell: same-street routes use the
//! roof-edge slope-intercept model, one-corner routes use the corner
//! diffraction model with the route's own corner distance, and anything
//! needing two turns is unreachable. UEs attach to the strongest received
//! cell; interference follows the configured scope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::propagation::{preset, CornerModel, Preset, SlopeInterceptModel};

/// Thermal noise density in dBm/Hz.
pub const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

/// Block lattice and sampling description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub block_long_m: f64,
    pub block_short_m: f64,
    /// Number of blocks along the long-block (x) axis.
    pub blocks_x: u32,
    /// Number of blocks along the short-block (y) axis.
    pub blocks_y: u32,
    /// Site spacing along the long-block axis; a multiple of block_long_m.
    pub site_spacing_long_m: f64,
    /// Site spacing along the short-block axis; a multiple of block_short_m.
    pub site_spacing_short_m: f64,
    pub ue_step_m: f64,
}

impl Default for GridSpec {
    /// 200 x 50 m blocks, sites every 400 m along / 200 m across
    /// (12.5 sites per square km), UEs every 3 m; the city spans
    /// 1.6 x 0.8 km which yields roughly 10^4 street sample points.
    fn default() -> Self {
        GridSpec {
            block_long_m: 200.0,
            block_short_m: 50.0,
            blocks_x: 8,
            blocks_y: 16,
            site_spacing_long_m: 400.0,
            site_spacing_short_m: 200.0,
            ue_step_m: 3.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.block_long_m > 0.0) || !(self.block_short_m > 0.0) {
            return Err(Error::config("block dimensions must be positive"));
        }
        if self.blocks_x < 4 || self.blocks_y < 4 {
            return Err(Error::config("need at least 4 blocks per axis"));
        }
        if !(self.ue_step_m > 0.0) {
            return Err(Error::config("ue_step_m must be positive"));
        }
        for (name, spacing, block) in [
            (
                "site_spacing_long_m",
                self.site_spacing_long_m,
                self.block_long_m,
            ),
            (
                "site_spacing_short_m",
                self.site_spacing_short_m,
                self.block_short_m,
            ),
        ] {
            let ratio = spacing / block;
            if !(spacing > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
                return Err(Error::config(format!(
                    "{name} = {spacing} must be a positive integer multiple of the block size {block}"
                )));
            }
        }
        Ok(())
    }

    pub fn width_m(&self) -> f64 {
        self.block_long_m * self.blocks_x as f64
    }

    pub fn height_m(&self) -> f64 {
        self.block_short_m * self.blocks_y as f64
    }
}

/// Street direction a cell radiates along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facing {
    East,
    West,
    North,
    South,
}

impl Facing {
    pub const ALL: [Facing; 4] = [Facing::East, Facing::West, Facing::North, Facing::South];

    pub fn as_str(&self) -> &'static str {
        match self {
            Facing::East => "east",
            Facing::West => "west",
            Facing::North => "north",
            Facing::South => "south",
        }
    }
}

/// Link-budget constants shared by all cells and UEs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    /// Fixed SINR back-off inside the Shannon rate.
    pub impl_penalty_db: f64,
    pub cell_height_m: f64,
    pub ue_height_m: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            tx_power_dbm: 28.0,
            antenna_gain_dbi: 23.0,
            ue_gain_dbi: 6.0,
            noise_figure_db: 9.0,
            bandwidth_hz: 8.0e8,
            impl_penalty_db: 3.0,
            cell_height_m: 20.0,
            ue_height_m: 1.5,
        }
    }
}

impl LinkBudget {
    /// Receiver noise floor in dBm.
    pub fn noise_floor_dbm(&self) -> f64 {
        NOISE_DENSITY_DBM_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// One rooftop cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub site_x_m: f64,
    pub site_y_m: f64,
    pub facing: Facing,
    pub height_m: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
}

/// One street sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePoint {
    pub x_m: f64,
    pub y_m: f64,
    pub ue_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub height_m: f64,
}

/// The street lattice with its sites and cells.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetGrid {
    pub spec: GridSpec,
    /// x coordinates of the vertical streets.
    pub vertical_xs: Vec<f64>,
    /// y coordinates of the horizontal streets.
    pub horizontal_ys: Vec<f64>,
    pub sites: Vec<(f64, f64)>,
    pub cells: Vec<Cell>,
    /// Analytic lattice density, 1 / (spacing_x * spacing_y), in sites/km^2.
    pub site_density_per_km2: f64,
}

/// Build the street graph and the site/cell lists.
pub fn build_grid(spec: &GridSpec, budget: &LinkBudget) -> Result<StreetGrid> {
    spec.validate()?;
    let width = spec.width_m();
    let height = spec.height_m();
    let vertical_xs = axis_coords(width, spec.block_long_m);
    let horizontal_ys = axis_coords(height, spec.block_short_m);
    let site_xs = axis_coords(width, spec.site_spacing_long_m);
    let site_ys = axis_coords(height, spec.site_spacing_short_m);
    let mut sites = Vec::new();
    let mut cells = Vec::new();
    for &sx in &site_xs {
        for &sy in &site_ys {
            sites.push((sx, sy));
            for facing in Facing::ALL {
                cells.push(Cell {
                    site_x_m: sx,
                    site_y_m: sy,
                    facing,
                    height_m: budget.cell_height_m,
                    tx_power_dbm: budget.tx_power_dbm,
                    antenna_gain_dbi: budget.antenna_gain_dbi,
                });
            }
        }
    }
    let site_density_per_km2 = 1.0e6 / (spec.site_spacing_long_m * spec.site_spacing_short_m);
    Ok(StreetGrid {
        spec: *spec,
        vertical_xs,
        horizontal_ys,
        sites,
        cells,
        site_density_per_km2,
    })
}

fn axis_coords(extent: f64, step: f64) -> Vec<f64> {
    let n = (extent / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Street sample points every `ue_step_m` along every street centerline,
/// intersections deduplicated.
pub fn sample_ue_points(grid: &StreetGrid, budget: &LinkBudget) -> Vec<UePoint> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let step = grid.spec.ue_step_m;
    let key = |x: f64, y: f64| ((x * 1000.0).round() as i64, (y * 1000.0).round() as i64);
    let mut push = |x: f64, y: f64, out: &mut Vec<UePoint>| {
        if seen.insert(key(x, y)) {
            out.push(UePoint {
                x_m: x,
                y_m: y,
                ue_gain_dbi: budget.ue_gain_dbi,
                noise_figure_db: budget.noise_figure_db,
                height_m: budget.ue_height_m,
            });
        }
    };
    for &y in &grid.horizontal_ys {
        let n = (grid.spec.width_m() / step + 1e-9).floor() as usize;
        for i in 0..=n {
            push(i as f64 * step, y, &mut out);
        }
    }
    for &x in &grid.vertical_xs {
        let n = (grid.spec.height_m() / step + 1e-9).floor() as usize;
        for i in 0..=n {
            push(x, i as f64 * step, &mut out);
        }
    }
    out
}

/// Route classification of a UE-cell pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteClass {
    SameStreet,
    OneCorner,
    Unreachable,
}

impl RouteClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RouteClass::SameStreet => "same-street",
            RouteClass::OneCorner => "one-corner",
            RouteClass::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Route {
    pub class: RouteClass,
    pub unwrapped_distance_m: f64,
    pub corner_distance_m: Option<f64>,
}

const POS_EPS: f64 = 1e-6;

/// Classify the route from `cell` to `ue` along the street graph. The UE is
/// same-street when it lies on the half-street the cell faces, one-corner
/// when one turn off that half-street reaches it, and unreachable
/// otherwise.
pub fn classify_route(grid: &StreetGrid, ue: &UePoint, cell: &Cell) -> Route {
    let on_h = grid
        .horizontal_ys
        .iter()
        .any(|&y| (ue.y_m - y).abs() < POS_EPS);
    let on_v = grid
        .vertical_xs
        .iter()
        .any(|&x| (ue.x_m - x).abs() < POS_EPS);

    // Map every facing onto "east" coordinates: a = along-facing axis,
    // b = cross axis.
    let (ue_a, ue_b, cell_a, cell_b, ue_on_axis, ue_on_cross) = match cell.facing {
        Facing::East => (ue.x_m, ue.y_m, cell.site_x_m, cell.site_y_m, on_h, on_v),
        Facing::West => (-ue.x_m, ue.y_m, -cell.site_x_m, cell.site_y_m, on_h, on_v),
        Facing::North => (ue.y_m, ue.x_m, cell.site_y_m, cell.site_x_m, on_v, on_h),
        Facing::South => (-ue.y_m, ue.x_m, -cell.site_y_m, cell.site_x_m, on_v, on_h),
    };

    if ue_on_axis && (ue_b - cell_b).abs() < POS_EPS && ue_a >= cell_a - POS_EPS {
        return Route {
            class: RouteClass::SameStreet,
            unwrapped_distance_m: (ue_a - cell_a).max(0.0),
            corner_distance_m: None,
        };
    }
    if ue_on_cross && ue_a > cell_a + POS_EPS {
        let corner = ue_a - cell_a;
        let leg = (ue_b - cell_b).abs();
        if leg > POS_EPS {
            return Route {
                class: RouteClass::OneCorner,
                unwrapped_distance_m: corner + leg,
                corner_distance_m: Some(corner),
            };
        }
    }
    Route {
        class: RouteClass::Unreachable,
        unwrapped_distance_m: f64::INFINITY,
        corner_distance_m: None,
    }
}

/// Piecewise-linear gain-degradation CDF sampled by inverse transform.
/// Points are (probability, degradation_db), non-decreasing in both.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationCdf {
    points: Vec<(f64, f64)>,
}

impl DegradationCdf {
    /// Roof-edge approximation of the measured degradation: 0 dB at P=0,
    /// 2 dB at P=0.9, 4 dB at P=1.
    pub fn default_roof_edge() -> Self {
        DegradationCdf {
            points: vec![(0.0, 0.0), (0.9, 2.0), (1.0, 4.0)],
        }
    }

    /// No degradation at all.
    pub fn zero() -> Self {
        DegradationCdf {
            points: vec![(0.0, 0.0), (1.0, 0.0)],
        }
    }

    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::config("degradation CDF needs >= 2 points"));
        }
        if (points[0].0 - 0.0).abs() > 1e-12 || (points.last().unwrap().0 - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                "degradation CDF must span probabilities 0 to 1",
            ));
        }
        for w in points.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::config("degradation CDF must be non-decreasing"));
            }
        }
        if points[0].1 < 0.0 {
            return Err(Error::config("degradation must be >= 0 dB"));
        }
        Ok(DegradationCdf { points })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        for w in self.points.windows(2) {
            let (p0, d0) = w[0];
            let (p1, d1) = w[1];
            if u <= p1 {
                if p1 - p0 < 1e-12 {
                    return d1;
                }
                return d0 + (d1 - d0) * (u - p0) / (p1 - p0);
            }
        }
        self.points.last().unwrap().1
    }
}

/// Which interferers reach a victim UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceScope {
    /// Every reachable cell interferes over its own route (same-street or
    /// one-corner), at full EIRP.
    AllRoutes,
    /// Only cells facing the victim's own street interfere.
    SameStreetOnly,
}

/// Optional per-link shadow fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shadowing {
    pub enabled: bool,
    /// Sigma for one-corner links (same-street links use the model's own
    /// sigma).
    pub corner_sigma_db: f64,
}

impl Default for Shadowing {
    fn default() -> Self {
        // Off by default: the map uses median path gains.
        Shadowing {
            enabled: false,
            corner_sigma_db: 3.4,
        }
    }
}

/// Propagation models the simulator evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetModels {
    pub same_street: SlopeInterceptModel,
    pub corner: CornerModel,
}

impl Default for NetModels {
    /// Roof-edge fit for same-street, Friis-pinned diffraction for corners.
    fn default() -> Self {
        let Preset::Slope(same_street) = preset("roof-edge").unwrap() else {
            unreachable!()
        };
        let Preset::Corner(corner) = preset("corner-diffraction-friis").unwrap() else {
            unreachable!()
        };
        NetModels {
            same_street,
            corner,
        }
    }
}

/// Complete simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScenario {
    pub spec: GridSpec,
    pub budget: LinkBudget,
    pub models: NetModels,
    pub degradation: DegradationCdf,
    pub shadowing: Shadowing,
    pub interference: InterferenceScope,
}

impl Default for GridScenario {
    fn default() -> Self {
        GridScenario {
            spec: GridSpec::default(),
            budget: LinkBudget::default(),
            models: NetModels::default(),
            degradation: DegradationCdf::default_roof_edge(),
            shadowing: Shadowing::default(),
            interference: InterferenceScope::AllRoutes,
        }
    }
}

/// A fully evaluated UE-cell link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEval {
    pub route: Route,
    pub path_gain_db: f64,
    pub rx_power_dbm: f64,
    /// Corner evaluation was clamped to the minimum after-corner distance.
    pub clamped: bool,
}

/// Evaluate one link's budget. `degradation_db` is the caller-drawn gain
/// degradation; unreachable routes return None.
pub fn link_budget(
    route: &Route,
    models: &NetModels,
    budget: &LinkBudget,
    degradation_db: f64,
) -> Result<Option<LinkEval>> {
    let (path_gain_db, clamped) = match route.class {
        RouteClass::Unreachable => return Ok(None),
        RouteClass::SameStreet => {
            // Points closer than the 1 m anchor evaluate at the anchor.
            let d = route.unwrapped_distance_m.max(1.0);
            (models.same_street.eval(d)?, false)
        }
        RouteClass::OneCorner => {
            let dc = route
                .corner_distance_m
                .ok_or_else(|| Error::domain("one-corner route lacks a corner distance"))?;
            let m = models.corner.with_corner_distance(dc)?;
            let eval = m.eval(route.unwrapped_distance_m)?;
            (eval.gain_db, eval.clamped)
        }
    };
    let rx_power_dbm = budget.tx_power_dbm + budget.antenna_gain_dbi - degradation_db
        + budget.ue_gain_dbi
        + path_gain_db;
    Ok(Some(LinkEval {
        route: *route,
        path_gain_db,
        rx_power_dbm,
        clamped,
    }))
}

/// Per-UE simulation outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeResult {
    pub x_m: f64,
    pub y_m: f64,
    /// Index into the grid's cell list; None for outage.
    pub serving_cell: Option<usize>,
    pub route_class: RouteClass,
    pub snr_db: f64,
    pub sinr_db: f64,
    pub rate_bps: f64,
}

/// Run the map: every UE against every cell, strongest-server attachment,
/// SINR per the scenario's interference scope, Shannon rate with the
/// implementation penalty. Per-UE RNG streams make the result independent
/// of evaluation order.
pub fn compute_map(scenario: &GridScenario, seed: u64) -> Result<Vec<UeResult>> {
    let grid = build_grid(&scenario.spec, &scenario.budget)?;
    let ues = sample_ue_points(&grid, &scenario.budget);
    compute_map_on(&grid, &ues, scenario, seed)
}

/// As [`compute_map`] but over a prebuilt grid and UE list.
pub fn compute_map_on(
    grid: &StreetGrid,
    ues: &[UePoint],
    scenario: &GridScenario,
    seed: u64,
) -> Result<Vec<UeResult>> {
    let noise_dbm = scenario.budget.noise_floor_dbm();
    let noise_lin = 10f64.powf(noise_dbm / 10.0);
    let penalty_lin = 10f64.powf(scenario.budget.impl_penalty_db / 10.0);
    let mut results = Vec::with_capacity(ues.len());

    for (ue_idx, ue) in ues.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ue_idx as u64);

        // Evaluated candidate links, with and without the per-link draws.
        struct Candidate {
            cell: usize,
            route: Route,
            rx_selected_dbm: f64,
            rx_nominal_dbm: f64,
            same_street: bool,
        }
        let mut cands: Vec<Candidate> = Vec::new();
        for (cell_idx, cell) in grid.cells.iter().enumerate() {
            let route = classify_route(grid, ue, cell);
            if route.class == RouteClass::Unreachable {
                continue;
            }
            let deg = scenario.degradation.sample(&mut rng);
            let shadow = if scenario.shadowing.enabled {
                let sigma = match route.class {
                    RouteClass::SameStreet => scenario.models.same_street.sigma_db,
                    _ => scenario.shadowing.corner_sigma_db,
                };
                if sigma > 0.0 {
                    Normal::new(0.0, sigma)
                        .map_err(|e| Error::domain(e.to_string()))?
                        .sample(&mut rng)
                } else {
                    0.0
                }
            } else {
                0.0
            };
            let Some(eval) = link_budget(&route, &scenario.models, &scenario.budget, deg)? else {
                continue;
            };
            cands.push(Candidate {
                cell: cell_idx,
                route,
                rx_selected_dbm: eval.rx_power_dbm + shadow,
                rx_nominal_dbm: eval.rx_power_dbm + deg + shadow,
                same_street: route.class == RouteClass::SameStreet,
            });
        }

        if cands.is_empty() {
            results.push(UeResult {
                x_m: ue.x_m,
                y_m: ue.y_m,
                serving_cell: None,
                route_class: RouteClass::Unreachable,
                snr_db: f64::NEG_INFINITY,
                sinr_db: f64::NEG_INFINITY,
                rate_bps: 0.0,
            });
            continue;
        }

        let best = cands
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.rx_selected_dbm
                    .partial_cmp(&b.1.rx_selected_dbm)
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let signal_dbm = cands[best].rx_selected_dbm;
        let signal_lin = 10f64.powf(signal_dbm / 10.0);
        // Interfering cells radiate their full EIRP (no degradation draw).
        let mut interference_lin = 0.0;
        for (i, c) in cands.iter().enumerate() {
            if i == best {
                continue;
            }
            let counted = match scenario.interference {
                InterferenceScope::AllRoutes => true,
                InterferenceScope::SameStreetOnly => c.same_street,
            };
            if counted {
                interference_lin += 10f64.powf(c.rx_nominal_dbm / 10.0);
            }
        }
        let snr_db = signal_dbm - noise_dbm;
        let sinr_lin = signal_lin / (noise_lin + interference_lin);
        let sinr_db = 10.0 * sinr_lin.log10();
        let rate_bps = scenario.budget.bandwidth_hz * (1.0 + sinr_lin / penalty_lin).log2();
        results.push(UeResult {
            x_m: ue.x_m,
            y_m: ue.y_m,
            serving_cell: Some(cands[best].cell),
            route_class: cands[best].route.class,
            snr_db,
            sinr_db,
            rate_bps,
        });
    }
    Ok(results)
}

/// One row of the percentile report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentileRow {
    pub percentile: f64,
    pub snr_db: f64,
    pub sinr_db: f64,
    pub rate_bps: f64,
    /// SNR percentile minus SINR percentile at this level.
    pub snr_sinr_gap_db: f64,
}

/// Empirical percentile with linear interpolation between order
/// statistics.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty slice");
    let rank = pct / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = rank - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// SNR/SINR/rate percentiles over the map.
pub fn percentile_report(results: &[UeResult], percentiles: &[f64]) -> Result<Vec<PercentileRow>> {
    if results.is_empty() {
        return Err(Error::domain("empty map"));
    }
    let sort = |mut v: Vec<f64>| {
        v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let snr = sort(results.iter().map(|r| r.snr_db).collect());
    let sinr = sort(results.iter().map(|r| r.sinr_db).collect());
    let rate = sort(results.iter().map(|r| r.rate_bps).collect());
    Ok(percentiles
        .iter()
        .map(|&p| {
            let s = percentile(&snr, p);
            let si = percentile(&sinr, p);
            PercentileRow {
                percentile: p,
                snr_db: s,
                sinr_db: si,
                rate_bps: percentile(&rate, p),
                snr_sinr_gap_db: s - si,
            }
        })
        .collect())
}
