//! Drives the exported bindings the way the demo page does: default
//! render on load, then a round of user edits.

use rolldisc_wasm::{compare_svg, cutpoint_json, orbit_svg};
use std::f64::consts::PI;

const SQ3: f64 = 1.732_050_807_568_877_2;

#[test]
fn initial_page_load_renders_all_three_panels() {
    let compare = compare_svg(0.5, SQ3 / 2.0, 2.0, PI, 201).unwrap();
    let orbit = orbit_svg("t0", "0,0.3,1,2", 0.5, SQ3 / 2.0, 2.0, PI, 121).unwrap();
    let cut = cutpoint_json(0.5, SQ3 / 2.0, 2.0);

    for svg in [&compare, &orbit] {
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("viewBox=\"0 0 600 600\""));
    }
    assert_eq!(orbit.matches("<polyline").count(), 4);
    assert!(cut.contains("\"cut_time\""));
}

#[test]
fn editing_the_covector_rerenders_consistently() {
    // Faster vertical rotation pulls the curves together; the reported
    // gap shrinks.
    let slow = compare_svg(0.5, SQ3 / 2.0, 2.0, PI / 10.0, 101).unwrap();
    let fast = compare_svg(0.5, SQ3 / 2.0, 20.0, PI / 10.0, 101).unwrap();
    let gap = |svg: &str| -> f64 {
        let tail = svg.split("sup gap ").nth(1).unwrap();
        tail[..tail.find('<').unwrap()].trim().parse().unwrap()
    };
    assert!(gap(&fast) < gap(&slow) / 2.0, "{} vs {}", gap(&fast), gap(&slow));

    // Same inputs, same bytes: the page can cache by parameter tuple.
    let again = compare_svg(0.5, SQ3 / 2.0, 20.0, PI / 10.0, 101).unwrap();
    assert_eq!(fast, again);
}

#[test]
fn error_paths_surface_as_messages_not_panics() {
    // The quadratic field t8 escapes in finite parameter: points with
    // y ≈ π/4 blow up near s = 2/y < 3.
    let err = orbit_svg("t8", "0,3", 0.5, SQ3 / 2.0, 2.0, PI, 61).unwrap_err();
    assert!(err.contains("failed"), "got: {err}");
    let err = compare_svg(0.5, 0.5, 2.0, -1.0, 101).unwrap_err();
    assert!(err.contains("horizon"));
}
