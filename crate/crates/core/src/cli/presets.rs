//! Built-in scenarios reproducing the reference experiments.

use serde_json::{json, Value};
use std::f64::consts::TAU;

use super::config::{parse_config, ScenarioConfig};
use super::CliError;

pub const PRESETS: [&str; 6] = ["prop32", "prop44", "qp-witness", "rage-lattice", "lemma47", "af-identity"];

fn driven(omega0: f64, amplitude: f64, frequency: f64) -> Value {
    json!({ "variant": "DrivenTwoLevel", "omega0": omega0, "drive_amplitude": amplitude,
            "drive_frequency": frequency })
}

fn preset_value(name: &str) -> Option<Value> {
    // Driving at ω = 1 makes every driven period T = 2π.
    let t = TAU;
    Some(match name {
        // Rabi frequency 1/2 puts the eigenphases at π/2 and 3π/2, so the
        // eigenvector orbit is exactly 4T-periodic.
        "prop32" => json!({
            "scenario": "prop32",
            "model": driven(1.3, 0.4, 1.0),
            "initial_state": { "kind": "floquet_eigenvector", "index": 0 },
            "grid": { "t1": 50.0 * t, "h": t / 400.0 },
            "diagnostics": [
                { "kind": "ap_scan", "epsilon": 0.1 },
                { "kind": "recurrence", "samples": 200 },
            ],
        }),
        "prop44" => json!({
            "scenario": "prop44",
            "model": driven(1.0, 0.3, 1.0),
            "initial_state": { "kind": "floquet_combination", "terms": [
                { "index": 0, "weight": [0.6, 0.0] },
                { "index": 1, "weight": [0.0, 0.8] },
            ] },
            "grid": { "t1": 200.0 * t, "h": t / 50.0 },
            "diagnostics": [
                { "kind": "energy_series", "probe": "h0" },
                { "kind": "stability", "source": { "probe": "h0" } },
            ],
        }),
        "qp-witness" => {
            let t2 = TAU;
            let horizons: Vec<f64> = [1, 2, 4, 8, 16, 32, 64].iter().map(|&k| k as f64 * t2).collect();
            json!({
                "scenario": "qp-witness",
                "model": { "variant": "QuasiperiodicExact", "omega1": (5f64.sqrt() - 1.0) / 2.0, "omega2": 1.0 },
                "initial_state": { "kind": "basis", "index": 0 },
                "grid": { "t1": 100.0 * t2, "h": t2 / 3200.0 },
                "diagnostics": [
                    { "kind": "ap_scan", "epsilon": 0.5 },
                    { "kind": "covering_number", "epsilon": 0.2,
                      "horizons": horizons },
                ],
            })
        }
        "rage-lattice" => json!({
            "scenario": "rage-lattice",
            "model": { "variant": "AutonomousDiscrete", "energies": { "sites": 1024, "value": 2.0 }, "hopping": -1.0 },
            "initial_state": { "kind": "basis", "index": 512 },
            "grid": { "t1": 250.0, "h": 0.1 },
            "diagnostics": [
                { "kind": "rage", "projection": { "sites": [512] },
                  "taus": [10.0, 30.0, 100.0, 250.0] },
            ],
        }),
        "lemma47" => json!({
            "scenario": "lemma47",
            "model": driven(1.3, 0.4, 1.0),
            "initial_state": { "kind": "floquet_eigenvector", "index": 0 },
            "grid": { "t1": t, "h": t / 100.0 },
            "diagnostics": [
                { "kind": "quasienergy_correspondence", "cutoffs": [8, 16, 32, 64] },
                { "kind": "releq", "cutoff": 32, "sigma": t / 4.0 },
                { "kind": "prop34_synthesis", "cutoff": 32 },
                { "kind": "mode_regularity" },
            ],
        }),
        "af-identity" => json!({
            "scenario": "af-identity",
            "model": { "variant": "AutonomousDiscrete", "energies": [0.9, 1.4, 2.1], "hopping": 0.2 },
            "initial_state": { "kind": "basis", "index": 0 },
            "grid": { "t1": 2.0, "h": 0.01 },
            "diagnostics": [
                { "kind": "enlarged_spectrum", "convergents": [4], "bins": 8, "period": 2.0 },
                { "kind": "af_identity", "q": 4, "probe": "number", "period": 2.0,
                  "state": { "kind": "eigenvectors", "terms": [
                      { "index": 1, "weight": [0.6, 0.0] },
                      { "index": 7, "weight": [0.0, 0.8] },
                  ] },
                  "times": { "count": 1000, "step": 0.05 } },
                { "kind": "theorem410", "q": 4, "index": 1, "periods": 100, "period": 2.0 },
            ],
        }),
        _ => return None,
    })
}

/// The named preset as a validated scenario.
pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    let value = preset_value(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    parse_config(&value.to_string()).map_err(CliError::ConfigInvalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.scenario, name);
        }
        assert!(matches!(preset("nope"), Err(CliError::UnknownPreset(_))));
    }
}
