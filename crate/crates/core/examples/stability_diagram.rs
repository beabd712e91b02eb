//! A coarse thermal stability diagram over (q, k_BT/E_S).

use saw_lattice::classical::{stability_diagram, trapped_fraction, DiagramSettings};
use saw_lattice::scales::Waveform;

fn main() -> saw_lattice::error::Result<()> {
    let q: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
    let theta: Vec<f64> = (0..=6).map(|i| 0.01 * i as f64).collect();
    let settings = DiagramSettings {
        samples_per_cell: 8,
        seed: 1,
        ..DiagramSettings::default()
    };
    let d = stability_diagram(&q, &theta, &Waveform::monochromatic(), &settings)?;

    print!("theta\\q");
    for v in &q {
        print!("{v:>5.1}");
    }
    println!();
    for (j, t) in theta.iter().enumerate().rev() {
        print!("{t:>7.2}");
        for i in 0..q.len() {
            print!("{:>5.2}", d.cell(i, j).fraction_stable);
        }
        println!();
    }
    let threshold = trapped_fraction(1.0);
    println!("lobe reaches k_BT/E_S = {:?}", d.lobe_max_theta(threshold));
    Ok(())
}
