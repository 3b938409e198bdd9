//! Minimal library walkthrough: build a gallery model, measure one layer's
//! energy leakage `‖Π_{>Λ'} e^{-isH_l} Π_{≤Λ}‖`, and compare it with the
//! closed-form bound `e^{-λ(Λ'-Λ)}(e^{α|s|M} - 1)`.

use std::collections::BTreeMap;

use lowtrot::hamiltonian::model_gallery;
use lowtrot::lab::{measure_leakage, Workbench};

fn main() -> Result<(), lowtrot::Error> {
    let spec = model_gallery("heisenberg_chain", 6, &BTreeMap::new())?;
    let bench = Workbench::new(spec)?;
    let j = bench.spec().params.j;
    let e0 = bench.e0()?;

    let rec = measure_leakage(&bench, 0, 0.2 / j, e0 + j, e0 + 3.0 * j)?;
    println!(
        "layer 0, s = 0.2/J: leakage {:.6e} <= bound {:.6e} (margin {:.3e}) satisfied={}",
        rec.measured, rec.bound, rec.margin, rec.satisfied
    );
    Ok(())
}
