//! Parabolic maximal function, Calderón-Zygmund decomposition and the weak
//! (1,1) / Fefferman-Stein constants of one random field.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levy_spde::cz::{
    cz_decompose, fefferman_stein_ratio, random_field, weak_type_constant, Mode, RadiusLadder, SpaceTimeGrid,
    WhitneyFactors, DEFAULT_RADII,
};
use levy_spde::scaling::ScalingTriple;

fn main() -> levy_spde::Result<()> {
    let grid = SpaceTimeGrid::new(32, 32, 1.0, -1.0, 1.0)?;
    let kappa = ScalingTriple::power(1.0)?;
    let ladder = RadiusLadder::new(&grid, &kappa, DEFAULT_RADII)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_field(&grid, 6, false, &mut rng);

    let alphas: Vec<f64> = (0..6).map(|k| f.mean() * 2f64.powi(k)).collect();
    println!("weak (1,1) constant: centred {:.3}", weak_type_constant(&f, &ladder, Mode::Centered, &alphas));
    let signed = random_field(&grid, 6, true, &mut rng);
    println!("Fefferman-Stein ratio p=2: {:.3}", fefferman_stein_ratio(&signed, &ladder, 2.0));

    let cz = cz_decompose(&f, 2.0 * f.mean(), &ladder, &kappa, WhitneyFactors::default())?;
    let recon = cz.reconstruct();
    let err = recon.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!(
        "{} parts, sup|g|/alpha = {:.3}, cover constant {:.3}, reconstruction error {err:.1e}",
        cz.parts.len(),
        cz.g_constant,
        cz.cover_constant
    );
    Ok(())
}
