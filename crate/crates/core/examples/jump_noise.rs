//! Poisson jump paths and the Itô isometry of the compensated integral.

use std::f64::consts::PI;

use levy_spde::function_spaces::Field;
use levy_spde::jump_noise::{ito_isometry_check, sample_path, MarkSpace};
use levy_spde::spectral::{FrequencyGrid, GridFunction};

fn main() -> levy_spde::Result<()> {
    let marks = MarkSpace::new(vec![1.0, 2.0])?;
    let path = sample_path(&marks, 1.0, 42)?;
    println!("{} jumps on [0, 1] (mark counts {} / {})", path.events.len(), path.count(0), path.count(1));

    let grid = FrequencyGrid::new(1, 128, 16.0)?;
    let single = MarkSpace::new(vec![1.5])?;
    let h = Field::new(single.value_space(2.0)?, vec![GridFunction::from_fn(&grid, |x| (-PI * x[0] * x[0]).exp())])?;
    let r = ito_isometry_check(&h, &single, 1.0, 4000, 1, 32)?;
    println!("E|M(T)|^2 = {:.5} +- {:.5}, exact {:.5}, z = {:.2}", r.mean, r.std_error, r.exact, r.z_score);
    Ok(())
}
