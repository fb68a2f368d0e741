//! Scenario files: JSON schema, loading, and validation into a resolved
//! [`Scenario`].
//!
//! Validation does not stop at the first problem; every violation found is
//! returned together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, ServiceArea, Zone, ZoneId, ZoneKind};
use crate::mobility::MobilityParams;
use crate::traffic::{check_subcarrier_order, ModulationProfile, NetworkId, ServiceId, UserId};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{}", .0.join("; "))]
    Invalid(Vec<String>),
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    /// Free-form remarks; ignored by the loader.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub service_area: ServiceAreaSpec,
    #[serde(default)]
    pub subzones: Vec<SubzoneSpec>,
    pub networks: Vec<NetworkSpec>,
    pub mobility: MobilitySpec,
    #[serde(default)]
    pub users: Vec<UserSpec>,
    pub horizon: usize,
    #[serde(default = "default_allocator")]
    pub allocator: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: RunOptions,
}

fn default_allocator() -> String {
    "dp".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceAreaSpec {
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubzoneSpec {
    pub id: u32,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub network: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Mobile,
    Wireless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub id: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub kind: NetworkKind,
    pub subcarriers: u32,
    pub ofdm_symbols: u32,
    pub bits_per_symbol: u32,
    /// Units available in each zone pool this network serves.
    pub initial_resources: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySpec {
    pub mean_speed: f64,
    /// Fixed `U^k_z` values; missing pairs count the scenario's users.
    #[serde(default)]
    pub active_users: Vec<ActiveUsersSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActiveUsersSpec {
    pub zone: u32,
    pub service: u32,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub id: u32,
    pub zone: u32,
    #[serde(default)]
    pub services: Vec<ServiceSpec>,
    #[serde(default)]
    pub ofdm_symbols: Option<u32>,
    #[serde(default)]
    pub bits_per_symbol: Option<u32>,
    #[serde(default)]
    pub data_size: u64,
    #[serde(default)]
    pub modulation_schedule: Vec<ModulationStepSpec>,
    #[serde(default)]
    pub weight: Option<f64>,
    #[serde(default)]
    pub snr: Option<f64>,
    #[serde(default)]
    pub average_rate: Option<f64>,
    #[serde(default)]
    pub min_units: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    pub id: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationStepSpec {
    pub step: usize,
    pub ofdm_symbols: u32,
    pub bits_per_symbol: u32,
}

/// How a user's network is picked among the covering ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Most available units first, then the other network, else blocked.
    #[default]
    Resources,
    /// Highest occupancy among the networks able to serve.
    Occupancy,
}

/// What happens when grants exceed a pool's availability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overload {
    /// Proportional down-scaling.
    #[default]
    Scale,
    /// Admit users in id order while they fit, block the rest.
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub overload: Overload,
}

// ---------------------------------------------------------------------------
// Resolved scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocatorKind {
    Dp,
    RoundRobin,
    Random,
    Fq,
    MaxMin,
    Wfq,
    MaxSnr,
    Pf,
}

impl AllocatorKind {
    pub const ALL: [AllocatorKind; 8] = [
        AllocatorKind::Dp,
        AllocatorKind::RoundRobin,
        AllocatorKind::Random,
        AllocatorKind::Fq,
        AllocatorKind::MaxMin,
        AllocatorKind::Wfq,
        AllocatorKind::MaxSnr,
        AllocatorKind::Pf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AllocatorKind::Dp => "dp",
            AllocatorKind::RoundRobin => "round_robin",
            AllocatorKind::Random => "random",
            AllocatorKind::Fq => "fq",
            AllocatorKind::MaxMin => "maxmin",
            AllocatorKind::Wfq => "wfq",
            AllocatorKind::MaxSnr => "maxsnr",
            AllocatorKind::Pf => "pf",
        }
    }
}

impl fmt::Display for AllocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AllocatorKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = AllocatorKind::ALL.iter().map(|a| a.name()).collect();
                format!("unknown allocator `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub id: NetworkId,
    pub name: String,
    pub kind: NetworkKind,
    /// Network-wide defaults; users may override the symbol and bit counts.
    pub profile: ModulationProfile,
    pub initial_resources: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct User {
    pub id: UserId,
    pub zone: ZoneId,
    pub services: Vec<(ServiceId, f64)>,
    pub ofdm_symbols: Option<u32>,
    pub bits_per_symbol: Option<u32>,
    pub schedule: BTreeMap<usize, (u32, u32)>,
    pub data_size: u64,
    pub weight: f64,
    pub snr: Option<f64>,
    pub average_rate: f64,
    pub min_units: f64,
}

impl User {
    /// `(N_of, N_bit)` at `step`, falling back to the user's constant values,
    /// then to the network defaults.
    pub fn modulation_at(&self, step: usize, network: &Network) -> (u32, u32) {
        if let Some(&m) = self.schedule.get(&step) {
            return m;
        }
        (
            self.ofdm_symbols.unwrap_or(network.profile.ofdm_symbols),
            self.bits_per_symbol.unwrap_or(network.profile.bits_per_symbol),
        )
    }

    pub fn profile_at(&self, step: usize, network: &Network) -> ModulationProfile {
        let (nof, nbit) = self.modulation_at(step, network);
        network.profile.with_modulation(nof, nbit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub service_area: ServiceArea,
    /// In file order, which is also the `K_r` order.
    pub networks: Vec<Network>,
    pub mobile: NetworkId,
    pub subzone_networks: BTreeMap<ZoneId, NetworkId>,
    pub mobility: MobilityParams,
    pub active_overrides: BTreeMap<(ZoneId, ServiceId), f64>,
    /// Sorted by id.
    pub users: Vec<User>,
    pub horizon: usize,
    pub allocator: AllocatorKind,
    pub seed: u64,
    pub options: RunOptions,
}

impl Scenario {
    pub fn network(&self, id: NetworkId) -> &Network {
        self.networks.iter().find(|n| n.id == id).expect("validated network reference")
    }

    pub fn mobile_network(&self) -> &Network {
        self.network(self.mobile)
    }

    /// Every (zone, network) pool with its starting units.
    pub fn initial_pools(&self) -> BTreeMap<(ZoneId, NetworkId), f64> {
        let mobile = self.mobile_network();
        let mut pools: BTreeMap<_, _> = self
            .service_area
            .partition()
            .map(|z| ((z, mobile.id), mobile.initial_resources))
            .collect();
        for (&zone, &net) in &self.subzone_networks {
            pools.insert((zone, net), self.network(net).initial_resources);
        }
        pools
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    resolve(file)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn finite_non_negative(v: f64) -> bool {
    v >= 0.0 && v.is_finite()
}

/// Checks a parsed file and resolves all references.
pub fn resolve(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    let mut errs: Vec<String> = Vec::new();

    if file.schema_version != SCHEMA_VERSION {
        errs.push(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", file.schema_version));
    }
    if file.horizon == 0 {
        errs.push("horizon must be at least 1".into());
    }
    let allocator = file.allocator.parse::<AllocatorKind>().unwrap_or_else(|e| {
        errs.push(e);
        AllocatorKind::Dp
    });

    // networks
    let mut networks = Vec::new();
    let mut seen = BTreeSet::new();
    for n in &file.networks {
        if !seen.insert(n.id) {
            errs.push(format!("network {}: duplicate id", n.id));
        }
        let profile = ModulationProfile {
            network: NetworkId(n.id),
            subcarriers: n.subcarriers,
            ofdm_symbols: n.ofdm_symbols,
            bits_per_symbol: n.bits_per_symbol,
        };
        if let Err(e) = profile.validate() {
            errs.push(e.to_string());
        }
        if !finite_non_negative(n.initial_resources) {
            errs.push(format!("network {}: initial_resources must be non-negative, got {}", n.id, n.initial_resources));
        }
        networks.push(Network {
            id: NetworkId(n.id),
            name: n.name.clone().unwrap_or_else(|| format!("net{}", n.id)),
            kind: n.kind,
            profile,
            initial_resources: n.initial_resources,
        });
    }
    let profiles: Vec<ModulationProfile> = networks.iter().map(|n| n.profile).collect();
    errs.extend(check_subcarrier_order(&profiles).into_iter().map(|e| e.to_string()));
    let mobiles: Vec<NetworkId> = networks.iter().filter(|n| n.kind == NetworkKind::Mobile).map(|n| n.id).collect();
    if mobiles.len() != 1 {
        errs.push(format!("exactly one mobile network is required, found {}", mobiles.len()));
    }
    let kind_of = |id: u32| networks.iter().find(|n| n.id == NetworkId(id)).map(|n| n.kind);

    // geometry
    let mut subzones = Vec::new();
    let mut subzone_networks = BTreeMap::new();
    for s in &file.subzones {
        subzones.push(Zone {
            id: ZoneId(s.id),
            center: Point::new(s.center_x, s.center_y),
            radius: s.radius,
            kind: ZoneKind::WirelessSubzone,
        });
        match kind_of(s.network) {
            None => errs.push(format!("subzone {}: unknown network {}", s.id, s.network)),
            Some(NetworkKind::Mobile) => errs.push(format!("subzone {}: network {} is not a wireless network", s.id, s.network)),
            Some(NetworkKind::Wireless) => {
                subzone_networks.insert(ZoneId(s.id), NetworkId(s.network));
            }
        }
    }
    let geometry_errs = ServiceArea::check(file.service_area.radius, &subzones);
    errs.extend(geometry_errs.iter().map(|e| format!("geometry: {e}")));
    let zone_known = |z: u32| z == ZoneId::UNCOVERED.0 || file.subzones.iter().any(|s| s.id == z);

    // mobility
    if !finite_non_negative(file.mobility.mean_speed) {
        errs.push(format!("mobility: mean_speed must be non-negative, got {}", file.mobility.mean_speed));
    }
    let mut active_overrides = BTreeMap::new();
    for a in &file.mobility.active_users {
        if !zone_known(a.zone) {
            errs.push(format!("mobility: active_users references unknown zone {}", a.zone));
        }
        if !finite_non_negative(a.count) {
            errs.push(format!("mobility: active user count must be non-negative, got {}", a.count));
        }
        if active_overrides.insert((ZoneId(a.zone), ServiceId(a.service)), a.count).is_some() {
            errs.push(format!("mobility: duplicate active_users entry for zone {} service {}", a.zone, a.service));
        }
    }

    // users
    let mut users = Vec::new();
    let mut user_ids = BTreeSet::new();
    for u in &file.users {
        let tag = format!("user {}", u.id);
        if !user_ids.insert(u.id) {
            errs.push(format!("{tag}: duplicate id"));
        }
        if !zone_known(u.zone) {
            errs.push(format!("{tag}: unknown zone {}", u.zone));
        }
        let mut service_ids = BTreeSet::new();
        for s in &u.services {
            if !service_ids.insert(s.id) {
                errs.push(format!("{tag}: duplicate service {}", s.id));
            }
            if !finite_non_negative(s.rate) {
                errs.push(format!("{tag}: service {} rate must be non-negative, got {}", s.id, s.rate));
            }
        }
        for (field, v) in [("ofdm_symbols", u.ofdm_symbols), ("bits_per_symbol", u.bits_per_symbol)] {
            if v == Some(0) {
                errs.push(format!("{tag}: {field} must be at least 1"));
            }
        }
        let mut schedule = BTreeMap::new();
        for m in &u.modulation_schedule {
            if m.ofdm_symbols == 0 || m.bits_per_symbol == 0 {
                errs.push(format!("{tag}: modulation_schedule step {} has a zero count", m.step));
            }
            if m.step >= file.horizon {
                errs.push(format!("{tag}: modulation_schedule step {} is beyond the horizon", m.step));
            }
            if schedule.insert(m.step, (m.ofdm_symbols, m.bits_per_symbol)).is_some() {
                errs.push(format!("{tag}: modulation_schedule repeats step {}", m.step));
            }
        }
        let weight = u.weight.unwrap_or(1.0);
        if !(weight > 0.0 && weight.is_finite()) {
            errs.push(format!("{tag}: weight must be positive, got {weight}"));
        }
        let average_rate = u.average_rate.unwrap_or(1.0);
        if !(average_rate > 0.0 && average_rate.is_finite()) {
            errs.push(format!("{tag}: average_rate must be positive, got {average_rate}"));
        }
        if let Some(snr) = u.snr.filter(|s| !finite_non_negative(*s)) {
            errs.push(format!("{tag}: snr must be non-negative, got {snr}"));
        }
        let min_units = u.min_units.unwrap_or(0.0);
        if !finite_non_negative(min_units) {
            errs.push(format!("{tag}: min_units must be non-negative, got {min_units}"));
        }
        users.push(User {
            id: UserId(u.id),
            zone: ZoneId(u.zone),
            services: u.services.iter().map(|s| (ServiceId(s.id), s.rate)).collect(),
            ofdm_symbols: u.ofdm_symbols,
            bits_per_symbol: u.bits_per_symbol,
            schedule,
            data_size: u.data_size,
            weight,
            snr: u.snr,
            average_rate,
            min_units,
        });
    }
    users.sort_by_key(|u| u.id);

    if !errs.is_empty() {
        return Err(ScenarioError::Invalid(errs));
    }
    let service_area = ServiceArea::new(file.service_area.radius, subzones).map_err(|e| ScenarioError::Invalid(vec![e.to_string()]))?;
    let mobility = MobilityParams::new(file.mobility.mean_speed).map_err(|e| ScenarioError::Invalid(vec![e.to_string()]))?;
    Ok(Scenario {
        service_area,
        mobile: mobiles[0],
        networks,
        subzone_networks,
        mobility,
        active_overrides,
        users,
        horizon: file.horizon,
        allocator,
        seed: file.seed,
        options: file.options,
    })
}
