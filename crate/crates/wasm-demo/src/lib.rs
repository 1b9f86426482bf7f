//! Browser bindings for the gaze-topo demo page. Every export returns a JSON
//! string; the page in `www/` draws it on plain canvases.

use gaze_topo::embed::{build_clouds, EmbeddingParams, PointCloud};
use gaze_topo::features::{featurize, slot_name, FEATURE_LEN};
use gaze_topo::ingest::generate_synthetic;
use gaze_topo::persistence::{compute_diagrams, PersistenceDiagram};
use gaze_topo::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Points past this count make the page sluggish.
pub const MAX_CLICKED_POINTS: usize = 400;

fn diagram_value(d: &PersistenceDiagram) -> Value {
    let bars: Vec<Value> = d
        .bars
        .iter()
        .map(|b| {
            let death = if b.is_infinite() {
                json!("inf")
            } else {
                json!(b.death)
            };
            json!([b.birth, death])
        })
        .collect();
    json!({ "dim": d.dim, "bars": bars })
}

fn cloud_value(cloud: &PointCloud) -> Result<Value> {
    let (d0, d1) = compute_diagrams(cloud)?;
    let points: Vec<&[f64]> = cloud.points().collect();
    Ok(json!({
        "dim": cloud.ambient_dim(),
        "points": points,
        "h0": diagram_value(&d0),
        "h1": diagram_value(&d1),
    }))
}

/// Generate one synthetic trajectory and run it through the feature
/// pipeline: clouds, diagrams of each cloud and the 72 features.
pub fn synthetic_analysis(
    class_id: u8,
    points: usize,
    noise: f64,
    seed: u64,
    params: &EmbeddingParams,
) -> Result<String> {
    let traj = generate_synthetic(class_id, points, noise, seed)?;
    let clouds = build_clouds(&traj, params)?;
    let features = featurize(&traj, params)?;
    let named: Vec<Value> = (0..FEATURE_LEN)
        .map(|i| json!({ "name": slot_name(i), "value": features.values[i] }))
        .collect();
    let out = json!({
        "label": class_id,
        "trajectory": traj.samples(),
        "clouds": {
            "raw": cloud_value(&clouds.raw)?,
            "x": cloud_value(&clouds.x)?,
            "y": cloud_value(&clouds.y)?,
        },
        "features": named,
    });
    Ok(out.to_string())
}

/// Diagrams of a planar point set given as `[x0, y0, x1, y1, ...]`.
pub fn point_set_analysis(flat_xy: &[f64]) -> Result<String> {
    if flat_xy.len() / 2 > MAX_CLICKED_POINTS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_CLICKED_POINTS} points, got {}",
            flat_xy.len() / 2
        )));
    }
    let cloud = PointCloud::from_flat(2, flat_xy.to_vec())?;
    Ok(cloud_value(&cloud)?.to_string())
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn analyze_synthetic(
    class_id: u8,
    points: usize,
    noise: f64,
    seed: u64,
    reduction: usize,
    dim: usize,
    delay: usize,
    normalize: bool,
) -> Result<String, JsError> {
    let params = EmbeddingParams {
        dim,
        delay,
        reduction,
        normalize,
    };
    synthetic_analysis(class_id, points, noise, seed, &params).map_err(js_err)
}

#[wasm_bindgen]
pub fn analyze_points(flat_xy: Vec<f64>) -> Result<String, JsError> {
    point_set_analysis(&flat_xy).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_json_shape() {
        let params = EmbeddingParams {
            dim: 3,
            delay: 4,
            reduction: 10,
            normalize: false,
        };
        let v: Value =
            serde_json::from_str(&synthetic_analysis(0, 600, 0.01, 1, &params).unwrap()).unwrap();
        assert_eq!(v["features"].as_array().unwrap().len(), FEATURE_LEN);
        assert_eq!(v["clouds"]["raw"]["points"].as_array().unwrap().len(), 60);
        assert_eq!(v["clouds"]["x"]["dim"], 3);
        assert_eq!(v["trajectory"].as_array().unwrap().len(), 600);
        assert!(synthetic_analysis(0, 20, 0.0, 1, &params).is_err());
    }

    #[test]
    fn clicked_square() {
        let v: Value = serde_json::from_str(
            &point_set_analysis(&[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(v["h1"]["bars"], json!([[1.0, 2f64.sqrt()]]));
        assert_eq!(v["h0"]["bars"].as_array().unwrap().len(), 4);
        assert!(point_set_analysis(&[]).is_err());
        assert!(point_set_analysis(&vec![0.5; 2 * MAX_CLICKED_POINTS + 2]).is_err());
    }
}
