#![allow(dead_code)]

use spdiff::dilaton::{AtomSpecies, DilatonField};
use spdiff::phases::GaussianWavePacket;
use spdiff::scenario::{Channels, Scenario};
use spdiff::threelevel::{Coupling, LaserField};
use spdiff::units::UnitSystem;

pub const C: f64 = 100.0;
pub const G: f64 = 0.1;
pub const MASS: f64 = 10.0;
pub const SIGMA: f64 = 0.05;

/// Direct-transition toy atom: k = Ω = 1, m̄ = 10, c = 100, g = 0.1, tuned
/// to resonance at canonical momentum `p_r`.
pub fn toy(channels: Channels, chirp: f64, dilaton: DilatonField, beta: (f64, f64), p_r: f64) -> Scenario {
    let units = UnitSystem::new(1.0, 1.0, C, G).unwrap();
    let species = AtomSpecies { mass: MASS, transition_frequency: C, ancilla_offset: 0.0, beta_e: beta.0, beta_g: beta.1 };
    let laser = LaserField::new(C, C, chirp, 0.0, Coupling::Direct { rabi: 1.0 });
    Scenario::new(units, species, laser, dilaton, channels).unwrap().tuned_to(p_r).unwrap()
}

pub fn perfect(channels: Channels) -> Scenario {
    toy(channels, -G, DilatonField::default(), (0.0, 0.0), 0.0)
}

/// Packets resonant with the mirror pulse: the g input at p_r − k/2 and the
/// e input at p_r + k/2, at positions z_e, z_g.
pub fn packet(scn: &Scenario, z_e: f64, z_g: f64, p_r: f64) -> GaussianWavePacket {
    let k = scn.laser.wavenumber;
    GaussianWavePacket {
        width_e: SIGMA,
        width_g: SIGMA,
        momentum_e: p_r + 0.5 * k,
        momentum_g: p_r - 0.5 * k,
        position_e: z_e,
        position_g: z_g,
    }
}

/// Final momentum of the g output of the e input for a pulse of duration t.
pub fn final_momentum(scn: &Scenario, packet: &GaussianWavePacket, t: f64) -> f64 {
    packet.momentum_g - scn.species.mass * scn.g() * t
}
