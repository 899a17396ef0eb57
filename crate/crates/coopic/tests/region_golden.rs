//! Cross-checks between the three independent routes to the virtual
//! channel's rate limits: exact LP over the constraint polytope,
//! Fourier-Motzkin projection, and the closed forms.

use coopic::region::{
    closed_form_sum_virtual, fourier_motzkin, fourier_motzkin_guarded, max_weighted_rate,
    virtual_constraints_cog, virtual_constraints_sym, with_total_rates,
};
use coopic::{ifc_cog_v, rat, rint, Error, LdmCogParams, LdmSymParams, Rat, RateVar};
use num_traits::One;
use RateVar::*;

fn all_ones(p: &coopic::Polytope) -> Vec<(RateVar, Rat)> {
    p.vars.iter().map(|&v| (v, Rat::one())).collect()
}

#[test]
fn sum_rate_reaches_closed_form_by_lp_and_by_projection() {
    let pipes = [rint(0), rat(1, 2), rint(1), rint(2), rat(7, 2)];
    for n_d in 0..=4u32 {
        for n_i in 0..=4u32 {
            if n_d == n_i {
                continue;
            }
            for ss in &pipes {
                for sd in &pipes {
                    if n_i < n_d && !sd.eq(&rint(0)) {
                        continue;
                    }
                    let p = LdmSymParams::new(n_d, n_i, 0);
                    let poly = virtual_constraints_sym(&p, ss, sd);
                    let lp = max_weighted_rate(&poly, &all_ones(&poly)).unwrap();
                    let cf = closed_form_sum_virtual(n_d, n_i, ss, sd).unwrap();
                    assert_eq!(lp, cf, "lp vs closed form at ({n_d},{n_i}) ss={ss} sd={sd}");

                    let proj = fourier_motzkin(
                        &with_total_rates(poly),
                        &[W1, U1, V1, V1p, W2, U2, V2, V2p],
                    )
                    .unwrap();
                    assert_eq!(proj.vars, vec![R1, R2]);
                    let fm =
                        max_weighted_rate(&proj, &[(R1, Rat::one()), (R2, Rat::one())]).unwrap();
                    assert_eq!(fm, cf, "projection vs closed form at ({n_d},{n_i})");
                }
            }
        }
    }
}

#[test]
fn projection_preserves_every_weighted_maximum() {
    let p = LdmSymParams::new(4, 2, 0);
    let poly = virtual_constraints_sym(&p, &rat(3, 2), &rint(0));
    let lifted = with_total_rates(poly);
    let proj = fourier_motzkin(&lifted, &[W1, U1, V1, V1p, W2, U2, V2, V2p]).unwrap();
    for (a, b) in [(1i64, 0i64), (0, 1), (1, 1), (2, 1), (1, 2), (3, 5)] {
        let weights = [(R1, rint(a)), (R2, rint(b))];
        let lifted_max = max_weighted_rate(&lifted, &weights).unwrap();
        let proj_max = max_weighted_rate(&proj, &weights).unwrap();
        assert_eq!(lifted_max, proj_max, "objective ({a},{b})");
    }
}

#[test]
fn pinned_primary_secondary_maximum_matches_min_v() {
    let pipes = [rint(0), rat(1, 2), rint(1), rint(2)];
    for n1 in 0..=3u32 {
        for n2 in 0..=3u32 {
            for a1 in 0..=3u32 {
                for a2 in 0..=3u32 {
                    for bp in &pipes {
                        let p = LdmCogParams::new(n1, n2, a1, a2, 0);
                        let mut poly = virtual_constraints_cog(&p, bp);
                        poly.add_eq(
                            &[(W1, Rat::one()), (U1, Rat::one()), (V1, Rat::one())],
                            rint(n1 as i64),
                        );
                        let got =
                            max_weighted_rate(&poly, &[(W2, Rat::one()), (U2, Rat::one())])
                                .unwrap();
                        let v = ifc_cog_v(n1, n2, a1, a2);
                        let want = [rint(v[0]), rint(v[1]) + bp, rint(v[2]), rint(v[3]) + bp]
                            .into_iter()
                            .min()
                            .unwrap();
                        assert_eq!(got, want, "({n1},{n2},{a1},{a2}) bp={bp}");
                    }
                }
            }
        }
    }
}

#[test]
fn elimination_guard_trips_before_blowup() {
    let p = LdmSymParams::new(6, 3, 0);
    let poly = virtual_constraints_sym(&p, &rint(2), &rint(0));
    let lifted = with_total_rates(poly);
    match fourier_motzkin_guarded(&lifted, &[W1, U1, V1, V1p, W2, U2, V2, V2p], 5) {
        Err(Error::GuardExceeded(n)) => assert!(n > 5),
        other => panic!("expected the guard to trip, got {other:?}"),
    }
}

#[test]
fn cognitive_constraint_listing_is_stable() {
    let p = LdmCogParams::new(2, 3, 5, 2, 0);
    let text = virtual_constraints_cog(&p, &rint(2)).to_text();
    let want = "\
R_W1 + R_U1 + R_V1 + R_W2 <= 5
R_U1 + R_V1 + R_W2 <= 5
R_W1 + R_U1 + R_V1 <= 4
R_W1 + R_U1 <= 2
R_U1 + R_W2 <= 5
R_U1 + R_V1 <= 4
R_U1 <= 0
R_W1 + R_W2 + R_U2 <= 3
R_W1 + R_U2 <= 2
R_W2 + R_U2 <= 3
R_U2 <= 0
R_V1 <= 2
";
    assert_eq!(text, want);
}
