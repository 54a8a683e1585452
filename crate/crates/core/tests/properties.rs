mod common;

fn ok(check: common::Check) {
    match check {
        Ok(msg) => println!("{msg}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn evolution_follows_dark_path_for_random_genomes() {
    ok(common::dark_path_oracle(50, 2024));
}

#[test]
fn parallel_transport_holds_along_path() {
    ok(common::parallel_transport(20, 17));
}

#[test]
fn lindblad_evolution_stays_physical() {
    ok(common::lindblad_physicality(100, 5));
}

#[test]
fn non_dominated_sort_matches_brute_force() {
    ok(common::sort_matches_brute_force(100, 9));
}

#[test]
fn ewm_invariance_and_dominant_row() {
    ok(common::ewm_properties(200, 3));
}

#[test]
fn step_halving_converges() {
    ok(common::dt_halving());
}
