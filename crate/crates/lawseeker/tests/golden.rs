//! Golden stability: exploring each bundled theory with its own pinned
//! options reproduces the frozen text report byte for byte.

use lawseeker::explore::explore;
use lawseeker::report::render_text;
use lawseeker::theories::bundled_catalog;

#[test]
fn bundled_theories_match_their_golden_reports() {
    for bundle in bundled_catalog() {
        let theory = bundle.load().unwrap();
        let report = explore(&theory, &theory.config).unwrap();
        let text = render_text(&report, &theory);
        assert_eq!(
            text, bundle.golden,
            "{}: golden mismatch; regenerate with \
             `lawseeker explore theories/{}.thy` if the change is intended",
            bundle.name, bundle.name
        );
    }
}
