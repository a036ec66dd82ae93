//! Desk problems shared by the integration tests.
#![allow(dead_code)]

pub mod fd;

use pffatigue::assembly::{Discretization, Materials};
use pffatigue::config::Config;
use pffatigue::fatigue::FatigueLaw;
use pffatigue::fracture::{FractureKind, FractureModel};
use pffatigue::mesh::{dof_map, resolve_constraints, DirichletBc, Dof, Mesh};
use pffatigue::plasticity::PlasticityParams;

pub const STEEL: &str = r#"
[material]
young = 215960.0
poisson = 0.3
yield_stress = 465.0
q_inf = 55.0
b = 2.38
backstresses = [{ c = 23554.0, gamma = 139.0 }]
"#;

/// Hardening variants of the carbon steel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hardening {
    Combined,
    Isotropic,
    Kinematic,
}

impl Hardening {
    pub fn material(self) -> String {
        match self {
            Hardening::Combined => STEEL.to_string(),
            Hardening::Isotropic => STEEL.replace("backstresses = [{ c = 23554.0, gamma = 139.0 }]", ""),
            Hardening::Kinematic => STEEL.replace("q_inf = 55.0", "q_inf = 0.0"),
        }
    }
}

/// Homogeneous 1 mm square in cyclic tension-compression, 4×4 elements.
pub fn uniaxial(amplitude: f64, toughness: f64, length_scale: f64, fatigue: &str, hardening: Hardening) -> Config {
    let text = format!(
        r#"
[mesh]
kind = "rectangle"
width = 1.0
height = 1.0
nx = 4
ny = 4
{material}
[fracture]
model = "at2"
toughness = {toughness:?}
length_scale = {length_scale:?}

[fatigue]
{fatigue}

[load]
amplitude = {amplitude:?}
increments_per_cycle = 16
cycles = 3000
boundary = [
    {{ set = "bottom", dof = "y" }},
    {{ set = "left", dof = "x" }},
    {{ set = "top", dof = "y", scale = 1.0 }},
]
"#,
        material = hardening.material()
    );
    Config::parse(&text).expect("uniaxial config")
}

/// Edge-slotted 4 mm plate pulled in mode I, 32×32 elements (h = ℓ/2).
pub fn compact(amplitude: f64, increments_per_cycle: usize, cycles: usize) -> Config {
    compact_with(32, amplitude, increments_per_cycle, cycles)
}

pub fn compact_with(n: usize, amplitude: f64, increments_per_cycle: usize, cycles: usize) -> Config {
    let text = format!(
        r#"
[mesh]
kind = "edge-notched"
width = 4.0
height = 4.0
nx = {n}
ny = {n}
notch_length = 1.5
{STEEL}
[fracture]
model = "at2"
toughness = 2.7
length_scale = 0.25

[load]
amplitude = {amplitude:?}
increments_per_cycle = {increments_per_cycle}
cycles = {cycles}
boundary = [
    {{ set = "bottom", dof = "y" }},
    {{ set = "origin", dof = "x" }},
    {{ set = "top", dof = "y", scale = 1.0 }},
]

[output]
failure_set = "right"
crack_path = [[1.5, 2.0], [4.0, 2.0]]
"#
    );
    Config::parse(&text).expect("compact config")
}

/// Plate with two offset edge slots; failure is monitored on the whole mesh.
pub fn double_notched(hardening: Hardening, amplitude: f64, toughness: f64, cycles: usize) -> Config {
    let text = format!(
        r#"
[mesh]
kind = "double-notched"
width = 4.0
height = 4.0
nx = 32
ny = 32
notch_length = 1.0
left_y = 2.3125
right_y = 1.6875
{material}
[fracture]
model = "at2"
toughness = {toughness:?}
length_scale = 0.25

[load]
amplitude = {amplitude:?}
increments_per_cycle = 16
cycles = {cycles}
boundary = [
    {{ set = "bottom", dof = "y" }},
    {{ set = "origin", dof = "x" }},
    {{ set = "top", dof = "y", scale = 1.0 }},
]
"#,
        material = hardening.material()
    );
    Config::parse(&text).expect("double-notched config")
}

pub fn materials(kind: FractureKind, fatigue: FatigueLaw) -> Materials {
    let strength = (kind == FractureKind::PfCzm).then_some(500.0);
    Materials {
        plasticity: PlasticityParams::carbon_steel(),
        fracture: FractureModel::new(kind, 2.7, 0.25, 215_960.0, strength).unwrap(),
        fatigue,
    }
}

/// A small mesh with the bottom edge clamped, so every block is definite.
pub fn clamped_patch(mesh: Mesh) -> Discretization {
    let bcs = [DirichletBc::fixed("bottom", Dof::X), DirichletBc::fixed("bottom", Dof::Y)];
    let constraints = resolve_constraints(&mesh, &bcs).unwrap();
    let dofs = dof_map(&mesh, &constraints);
    Discretization::new(mesh, dofs).unwrap()
}


/// Independent uniaxial Voce + Armstrong–Frederick integrator: backward Euler
/// on each strain step, the plastic increment found by bisection.
pub struct Uniaxial1d {
    pub young: f64,
    pub yield_stress: f64,
    pub q_inf: f64,
    pub b: f64,
    pub backstresses: Vec<(f64, f64)>,
    plastic_strain: f64,
    accumulated: f64,
    x: Vec<f64>,
}

impl Uniaxial1d {
    pub fn new(params: &PlasticityParams) -> Self {
        Self {
            young: params.young,
            yield_stress: params.yield_stress,
            q_inf: params.q_inf,
            b: params.b,
            backstresses: params.backstresses.iter().map(|k| (k.c, k.gamma)).collect(),
            plastic_strain: 0.0,
            accumulated: 0.0,
            x: vec![0.0; params.backstresses.len()],
        }
    }

    fn sigma_y(&self, p: f64) -> f64 {
        self.yield_stress + self.q_inf * (1.0 - (-self.b * p).exp())
    }

    fn backstress_after(&self, n: f64, dp: f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.backstresses)
            .map(|(&x, &(c, g))| (x + c * n * dp) / (1.0 + g * dp))
            .collect()
    }

    /// Stress after moving the total strain to `strain`.
    pub fn step(&mut self, strain: f64) -> f64 {
        let trial = self.young * (strain - self.plastic_strain);
        let xsum: f64 = self.x.iter().sum();
        let xi = trial - xsum;
        let f = xi.abs() - self.sigma_y(self.accumulated);
        if f <= 0.0 {
            return trial;
        }
        let n = xi.signum();
        let residual = |dp: f64| {
            let x: f64 = self.backstress_after(n, dp).iter().sum();
            n * (trial - self.young * n * dp - x) - self.sigma_y(self.accumulated + dp)
        };
        let (mut lo, mut hi) = (0.0, f / self.young);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        let dp = 0.5 * (lo + hi);
        self.x = self.backstress_after(n, dp);
        self.plastic_strain += n * dp;
        self.accumulated += dp;
        trial - self.young * n * dp
    }
}

/// Triangular strain history 0 → +a → −a → … over `cycles` full cycles.
pub fn strain_cycles(amplitude: f64, cycles: usize, step: f64) -> Vec<f64> {
    let per_quarter = (amplitude / step).round() as usize;
    let mut out = Vec::with_capacity(4 * per_quarter * cycles);
    for i in 1..=per_quarter {
        out.push(amplitude * i as f64 / per_quarter as f64);
    }
    for _ in 0..cycles {
        for i in 1..=2 * per_quarter {
            out.push(amplitude * (1.0 - i as f64 / per_quarter as f64));
        }
        for i in 1..=2 * per_quarter {
            out.push(amplitude * (-1.0 + i as f64 / per_quarter as f64));
        }
    }
    out.truncate(4 * per_quarter * cycles);
    out
}

/// Peak tensile and compressive stress in each cycle.
pub fn cycle_peaks(stress: &[f64], cycles: usize) -> Vec<(f64, f64)> {
    let per = stress.len() / cycles;
    stress
        .chunks(per)
        .map(|c| (c.iter().copied().fold(f64::MIN, f64::max), c.iter().copied().fold(f64::MAX, f64::min)))
        .collect()
}

/// Steps `config` to the end, checking after every increment that the
/// committed history variables did not decrease and that the history field
/// satisfies ψ⁺ − H ≤ 0, ΔH ≥ 0 and ΔH·(ψ⁺ − H) = 0.
pub fn irreversible_run(config: Config) -> Result<pffatigue::driver::Simulation, String> {
    use pffatigue::driver::{Simulation, StepOutcome};
    let mut sim = Simulation::new(config).map_err(|e| e.to_string())?;
    let mut before = sim.states.clone();
    let mut last_extension = 0.0;
    while let StepOutcome::Advanced(record) = sim.step() {
        let k = record.increment;
        // with sub-steps, ΔH spans several commits and only the sign tests apply
        let single_commit = sim.last_log.iter().all(|(substep, _)| *substep == 1);
        for (q, (old, new)) in before.iter().zip(&sim.states).enumerate() {
            let fail = |what: &str| Err(format!("{what} at point {q}, increment {k}"));
            if new.history < old.history {
                return fail("H decreased");
            }
            if new.fatigue.accumulated < old.fatigue.accumulated {
                return fail("θ̄ decreased");
            }
            if new.plastic.eq_plastic_strain < old.plastic.eq_plastic_strain {
                return fail("εp decreased");
            }
            if new.plastic.plastic_work < old.plastic.plastic_work {
                return fail("ψp decreased");
            }
            if new.psi_plus > new.history {
                return fail("ψ⁺ above H");
            }
            if single_commit && (new.history - old.history) * (new.psi_plus - new.history) != 0.0 {
                return fail("ΔH·(ψ⁺ − H) non-zero");
            }
        }
        if record.crack_extension < last_extension {
            return Err(format!("Δa decreased at increment {k}"));
        }
        last_extension = record.crack_extension;
        before = sim.states.clone();
    }
    match &sim.metrics.aborted {
        Some(reason) => Err(format!("run aborted: {reason}")),
        None => Ok(sim),
    }
}
