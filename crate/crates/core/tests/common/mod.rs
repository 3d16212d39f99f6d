#![allow(dead_code)]

use annulus::catalog::from_labels;
use annulus::AnnulusMap;

/// Two triangles sharing a diagonal, drawn in a disk; balanced.
pub fn fig_a() -> AnnulusMap {
    from_labels(
        &["v1", "v2", "v3", "v4"],
        &[("e0", "v1", "v2"), ("e1", "v2", "v3"), ("e2", "v3", "v4"), ("e3", "v4", "v1"), ("e4", "v2", "v4")],
        &[&["e3-", "e0+"], &["e0-", "e4+", "e1+"], &["e1-", "e2+"], &["e4-", "e3+", "e2-"]],
        [Some("e0-"), Some("e0-")],
    )
    .unwrap()
}

/// Unbalanced (2,3,2)-tight: 4 vertices, 6 edges.
pub fn fig_b() -> AnnulusMap {
    from_labels(
        &["v1", "v2", "v3", "v4"],
        &[
            ("e0", "v1", "v2"),
            ("e1", "v3", "v4"),
            ("e2", "v3", "v2"),
            ("e3", "v3", "v4"),
            ("e4", "v4", "v1"),
            ("e5", "v2", "v1"),
        ],
        &[&["e0+", "e4-", "e5-"], &["e5+", "e2-", "e0-"], &["e1+", "e3+", "e2+"], &["e3-", "e1-", "e4+"]],
        [Some("e0+"), Some("e1-")],
    )
    .unwrap()
}

/// Unbalanced (2,3,1)-tight: doubled path edges plus a winding loop.
pub fn fig_c() -> AnnulusMap {
    from_labels(
        &["v1", "v2", "v4"],
        &[("e0", "v1", "v2"), ("e1", "v4", "v4"), ("e2", "v1", "v2"), ("e3", "v1", "v4"), ("e4", "v4", "v1")],
        &[&["e0+", "e4-", "e3+", "e2+"], &["e2-", "e0-"], &["e3-", "e1+", "e1-", "e4+"]],
        [Some("e0+"), Some("e1-")],
    )
    .unwrap()
}
