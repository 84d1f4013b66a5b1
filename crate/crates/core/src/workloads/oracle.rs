//! Plaintext statistics over the original integers.

use num_rational::Ratio;

use super::{Dataset, LinregModel};

/// Column means.
pub fn mean(data: &Dataset) -> Vec<Ratio<i128>> {
    let u = data.users() as i128;
    (0..data.cols())
        .map(|j| Ratio::new(data.column(j).iter().map(|&v| v as i128).sum(), u))
        .collect()
}

/// Population variance of each column, from deviations about the mean.
pub fn variance(data: &Dataset) -> Vec<Ratio<i128>> {
    let u = data.users() as i128;
    mean(data)
        .into_iter()
        .enumerate()
        .map(|(j, mu)| {
            let ss = data
                .column(j)
                .iter()
                .map(|&v| {
                    let d = Ratio::from_integer(v as i128) - mu;
                    d * d
                })
                .fold(Ratio::from_integer(0), |a, b| a + b);
            ss / u
        })
        .collect()
}

/// `(Σ w_j x_j + b) mod t` for every row.
pub fn linreg(data: &Dataset, model: &LinregModel, t: u64) -> Vec<Ratio<i128>> {
    let t = t as u128;
    data.rows()
        .iter()
        .map(|row| {
            let dot = row
                .iter()
                .zip(&model.weights)
                .fold(model.bias as u128 % t, |acc, (&x, &w)| {
                    (acc + (x as u128 % t) * (w as u128 % t)) % t
                });
            Ratio::from_integer(dot as i128)
        })
        .collect()
}
