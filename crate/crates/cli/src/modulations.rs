//! Turns a trained checkpoint into the layered optical stack it encodes:
//! one complex modulation mask per layer, with the residual between the
//! digital layer and its optical realization as the quality figure.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use unilearn::data::DataError;
use unilearn::diffraction::{build_operator, modulation_from_weights, DiffractionGeometry};
use unilearn::linalg::CVector;
use unilearn::network::Network;

use crate::artifacts::write_json_checked;
use crate::config::ConfigError;
use crate::experiments::RunError;

/// One layer's extracted mask and its reconstruction residual
/// `max_j |r_j·(P y)_j − f(W y)_j|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMasks {
    pub index: usize,
    pub mask_re: Vec<f64>,
    pub mask_im: Vec<f64>,
    pub residual: f64,
}

/// The emitted `modulations.json` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationStack {
    pub geometry: DiffractionGeometry,
    pub layers: Vec<LayerMasks>,
    pub max_residual: f64,
}

/// Parses `n=128,aperture=5e-3,wavelength=632.8e-9[,distance=0.02]`;
/// without `distance` the geometry sits at the characteristic sampling
/// distance.
pub fn parse_geometry(text: &str) -> Result<DiffractionGeometry, ConfigError> {
    let mut n = None;
    let mut aperture = None;
    let mut wavelength = None;
    let mut distance = None;
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            ConfigError::Invalid(format!("geometry field {part:?} is not key=value"))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = || {
            value.parse::<f64>().map_err(|_| {
                ConfigError::Invalid(format!("geometry field {key} has non-numeric value {value:?}"))
            })
        };
        match key {
            "n" => {
                n = Some(value.parse::<usize>().map_err(|_| {
                    ConfigError::Invalid(format!("geometry field n has bad value {value:?}"))
                })?)
            }
            "aperture" => aperture = Some(parse_f64()?),
            "wavelength" => wavelength = Some(parse_f64()?),
            "distance" => distance = Some(parse_f64()?),
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "unknown geometry field {key:?}; expected n, aperture, wavelength, distance"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| ConfigError::Invalid("geometry needs n=<samples>".into()))?;
    let aperture =
        aperture.ok_or_else(|| ConfigError::Invalid("geometry needs aperture=<meters>".into()))?;
    let wavelength = wavelength
        .ok_or_else(|| ConfigError::Invalid("geometry needs wavelength=<meters>".into()))?;
    if n < 2 || !n.is_power_of_two() {
        return Err(ConfigError::Invalid(format!(
            "geometry n must be a power of two ≥ 2, got {n}"
        )));
    }
    if aperture <= 0.0 || wavelength <= 0.0 {
        return Err(ConfigError::Invalid(
            "geometry aperture and wavelength must be positive".into(),
        ));
    }
    Ok(match distance {
        Some(z) if z.is_finite() => DiffractionGeometry::new(n, aperture, wavelength, z),
        Some(z) => {
            return Err(ConfigError::Invalid(format!(
                "geometry distance must be finite, got {z}"
            )))
        }
        None => DiffractionGeometry::at_sample_distance(n, aperture, wavelength),
    })
}

/// Extracts the mask stack for `net` by chaining the digital forward pass
/// through the probe field (a unit-amplitude plane wave).
///
/// Requires an all-square network matching the geometry size with zero
/// biases — a mask multiplies the propagated field and has nowhere to put
/// an additive term.
pub fn extract_stack(
    net: &Network,
    geometry: DiffractionGeometry,
) -> Result<ModulationStack, RunError> {
    let n = geometry.n_samples;
    if net.input_dim() != n {
        return Err(ConfigError::Invalid(format!(
            "checkpoint expects {}-dim fields but the geometry has {n} samples",
            net.input_dim()
        ))
        .into());
    }
    for (l, layer) in net.layers.iter().enumerate() {
        if layer.weight.rows != n || layer.weight.cols != n {
            return Err(ConfigError::Invalid(format!(
                "layer {l} is {}×{}, but masks need {n}×{n} layers",
                layer.weight.rows, layer.weight.cols
            ))
            .into());
        }
        if layer.bias.max_modulus() != 0.0 {
            return Err(ConfigError::Invalid(format!(
                "layer {l} carries a non-zero bias, which a modulation mask cannot represent"
            ))
            .into());
        }
    }

    let op = build_operator(geometry);
    let mut y = CVector::new(vec![Complex64::new(1.0, 0.0); n]);
    let mut layers = Vec::with_capacity(net.layers.len());
    let mut max_residual: f64 = 0.0;
    for (index, layer) in net.layers.iter().enumerate() {
        let mask = modulation_from_weights(&layer.weight, &layer.activation, &y, &op)
            .map_err(|e| RunError::Numeric(format!("layer {index}: {e}")))?;
        let digital = layer
            .activation
            .apply(&layer.weight.matvec(&y))
            .map_err(|e| RunError::Numeric(format!("layer {index}: {e}")))?;
        let optical = op
            .propagate(&y)
            .map_err(|e| RunError::Numeric(format!("layer {index}: {e}")))?
            .hadamard(&mask);
        let residual = (&optical - &digital).max_modulus();
        max_residual = max_residual.max(residual);
        layers.push(LayerMasks {
            index,
            mask_re: mask.data.iter().map(|c| c.re).collect(),
            mask_im: mask.data.iter().map(|c| c.im).collect(),
            residual,
        });
        y = digital;
    }
    Ok(ModulationStack {
        geometry,
        layers,
        max_residual,
    })
}

/// Loads a checkpoint, extracts its masks, and writes the stack document
/// to `out_path`.
pub fn emit(
    checkpoint: &Path,
    geometry: DiffractionGeometry,
    out_path: &Path,
) -> Result<ModulationStack, RunError> {
    let bytes = std::fs::read(checkpoint).map_err(|e| RunError::Data(DataError::Io(e)))?;
    let net: Network = serde_json::from_slice(&bytes).map_err(|e| {
        RunError::Config(ConfigError::Invalid(format!(
            "checkpoint {} does not parse as a network: {e}",
            checkpoint.display()
        )))
    })?;
    let stack = extract_stack(&net, geometry)?;
    write_json_checked(out_path, &stack)?;
    Ok(stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use unilearn::activation::Activation;
    use unilearn::linalg::CMatrix;
    use unilearn::network::Layer;

    fn bench_geometry(n: usize) -> DiffractionGeometry {
        DiffractionGeometry::at_sample_distance(n, 5e-3, 632.8e-9)
    }

    #[test]
    fn geometry_strings_parse_with_and_without_distance() {
        let g = parse_geometry("n=128,aperture=5e-3,wavelength=632.8e-9").unwrap();
        assert_eq!(g.n_samples, 128);
        assert_eq!(g, bench_geometry(128));
        let g2 = parse_geometry("n=32, aperture=5e-3, wavelength=632.8e-9, distance=0.25").unwrap();
        assert_eq!(g2.distance, 0.25);
    }

    #[test]
    fn geometry_strings_reject_bad_input() {
        for bad in [
            "n=12,aperture=5e-3,wavelength=632.8e-9", // not a power of two
            "aperture=5e-3,wavelength=632.8e-9",      // missing n
            "n=16,aperture=5e-3,wavelength=632.8e-9,junk=1",
            "n=16;aperture=5e-3",
            "n=16,aperture=-1.0,wavelength=632.8e-9",
        ] {
            assert!(parse_geometry(bad).is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn propagation_weights_yield_unit_masks() {
        let g = bench_geometry(32);
        let op = build_operator(g);
        let net = Network::new(vec![Layer::unitary(
            op.dense_matrix(),
            Activation::identity(),
        )]);
        let stack = extract_stack(&net, g).unwrap();
        assert!(stack.max_residual <= 1e-12);
        for (re, im) in stack.layers[0].mask_re.iter().zip(&stack.layers[0].mask_im) {
            let err = (Complex64::new(*re, *im) - Complex64::new(1.0, 0.0)).norm();
            assert!(err <= 1e-10);
        }
    }

    #[test]
    fn biased_layers_are_refused() {
        let g = bench_geometry(16);
        let mut layer = Layer::unitary(CMatrix::identity(16), Activation::identity());
        layer.bias[3] = Complex64::new(0.0, 0.5);
        let err = extract_stack(&Network::new(vec![layer]), g).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn mismatched_geometry_is_refused() {
        let g = bench_geometry(16);
        let net = Network::new(vec![Layer::unitary(
            CMatrix::identity(32),
            Activation::identity(),
        )]);
        assert_eq!(extract_stack(&net, g).unwrap_err().exit_code(), 2);
    }
}
