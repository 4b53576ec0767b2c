//! Acceptance criteria 1 to 11 on the bundled campaign. Each test prints one
//! pass/fail line; `summary_table` prints the whole table with details.

use terrace_core::acceptance::{campaign, CriterionResult};

fn check(id: u32) -> &'static CriterionResult {
    let r = campaign().result(id);
    println!("{}", r.line());
    for d in &r.details {
        println!("      {d}");
    }
    r
}

macro_rules! criterion {
    ($name:ident, $id:expr) => {
        #[test]
        fn $name() {
            let r = check($id);
            assert!(r.pass, "criterion {} failed: {}", $id, r.measured);
        }
    };
}

criterion!(c01_energy_dissipation_identity, 1);
criterion!(c02_front_speed_and_conversion, 2);
criterion!(c03_standing_wall_energy, 3);
criterion!(c04_q0_controls_u, 4);
criterion!(c05_subsonic_invasion, 5);
criterion!(c06_travelling_frame_decay, 6);
criterion!(c07_single_front_terrace, 7);
criterion!(c08_two_front_terrace, 8);
criterion!(c09_residual_energy, 9);
criterion!(c10_firewall_lemmas, 10);
criterion!(c11_tail_asymptotics, 11);

#[test]
fn summary_table() {
    let c = campaign();
    println!("{}", c.table());
    assert_eq!(c.results.len(), 11);
}
