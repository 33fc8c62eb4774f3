//! Dense reference implementations used as independent oracles.
#![allow(dead_code)]

/// `sign(normalize(z · M))` written out literally, column by column.
pub fn reference_encode(projection: &[f32], feature_dim: usize, hd_dim: usize, z: &[f32], eps: f64) -> Vec<i8> {
    let mut hv = vec![0f32; hd_dim];
    for (j, out) in hv.iter_mut().enumerate() {
        let mut sum = 0f32;
        for i in 0..feature_dim {
            sum += z[i] * projection[i * hd_dim + j];
        }
        *out = sum;
    }
    let mut sq = 0f32;
    for v in &hv {
        sq += v * v;
    }
    let denom = sq.sqrt().max(eps as f32);
    hv.iter()
        .map(|&v| if v / denom < 0.0 { -1 } else { 1 })
        .collect()
}

pub fn reference_cosine(hv: &[i8], class: &[i32]) -> f64 {
    let dot: f64 = hv.iter().zip(class).map(|(&a, &b)| a as f64 * b as f64).sum();
    let na: f64 = hv.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = class.iter().map(|&b| (b as f64).powi(2)).sum::<f64>().sqrt();
    if nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// (label, similarities) by brute force with lowest-index tie-breaking.
pub fn reference_classify(hv: &[i8], classes: &[Vec<i32>]) -> (usize, Vec<f64>) {
    let sims: Vec<f64> = classes.iter().map(|c| reference_cosine(hv, c)).collect();
    let mut best = 0;
    for j in 1..sims.len() {
        if sims[j] > sims[best] {
            best = j;
        }
    }
    (best, sims)
}

pub fn reference_loss(hv: &[i8], classes: &[Vec<i32>], truth: usize) -> f64 {
    let (pred, sims) = reference_classify(hv, classes);
    if pred == truth {
        0.0
    } else {
        sims[pred] - sims[truth]
    }
}

pub fn dot(hv: &[i8], class: &[i32]) -> i64 {
    hv.iter().zip(class).map(|(&a, &b)| a as i64 * b as i64).sum()
}
