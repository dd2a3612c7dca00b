use jmx::table::{Row, Table};
use proptest::prelude::*;

fn cell() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![
        1 => Just(None),
        8 => any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Some),
        1 => prop_oneof![Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE), Just(5e-324)].prop_map(Some),
    ]
}

proptest! {
    #[test]
    fn csv_is_bit_exact(rows in prop::collection::vec(prop::collection::vec(cell(), 4), 0..20)) {
        let mut table = Table::new(&["E", "T2", "R2", "defect"]);
        for values in rows {
            table.rows.push(Row::ok(values));
        }
        let back = Table::from_csv(&table.to_csv()).unwrap();
        prop_assert_eq!(&back.columns, &table.columns);
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (a, b) in back.rows.iter().zip(&table.rows) {
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
            }
            prop_assert_eq!(&a.status, &b.status);
        }
    }
}

#[test]
fn comments_are_skipped() {
    let t = Table::from_csv("# produced by hand\nE,status\n# mid-file note\n1.5e0,ok\n").unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].values[0], Some(1.5));
}
