use std::collections::HashMap;

use evalarena::metrics::{cosine_similarity, lcs_len, rouge_l, rouge_n, EmbeddingVector};
use proptest::prelude::*;

/// Enumerates every n-gram of both sides and counts clipped matches by linear
/// scan.
fn brute_rouge_n(cand: &[String], refr: &[String], n: usize) -> (f64, f64, f64) {
    let grams = |s: &[String]| -> Vec<Vec<String>> {
        if s.len() < n {
            return vec![];
        }
        (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
    };
    let (cg, rg) = (grams(cand), grams(refr));
    let mut distinct: Vec<&Vec<String>> = Vec::new();
    for g in &cg {
        if !distinct.contains(&g) {
            distinct.push(g);
        }
    }
    let overlap: usize = distinct
        .iter()
        .map(|g| {
            let in_c = cg.iter().filter(|x| x == g).count();
            let in_r = rg.iter().filter(|x| x == g).count();
            in_c.min(in_r)
        })
        .sum();
    prf(overlap, cg.len(), rg.len())
}

fn prf(overlap: usize, c: usize, r: usize) -> (f64, f64, f64) {
    let p = if c == 0 {
        0.0
    } else {
        overlap as f64 / c as f64
    };
    let rc = if r == 0 {
        0.0
    } else {
        overlap as f64 / r as f64
    };
    let f = if p + rc > 0.0 {
        2.0 * p * rc / (p + rc)
    } else {
        0.0
    };
    (p, rc, f)
}

/// Memoised recursive LCS.
fn brute_lcs(a: &[String], b: &[String]) -> usize {
    fn go(
        a: &[String],
        b: &[String],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == a.len() || j == b.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            1 + go(a, b, i + 1, j + 1, memo)
        } else {
            go(a, b, i + 1, j, memo).max(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn tokens(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["a", "b", "c", "d", "e", "ğ", "ı"]),
        0..=max,
    )
    .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn rouge_n_matches_enumeration(c in tokens(30), r in tokens(30), n in 1usize..=3) {
        let got = rouge_n(&c, &r, n);
        let (p, rc, f) = brute_rouge_n(&c, &r, n);
        prop_assert_eq!(got.precision, p);
        prop_assert_eq!(got.recall, rc);
        prop_assert_eq!(got.f1, f);
    }

    #[test]
    fn rouge_fields_bounded_and_f1_symmetric(c in tokens(20), r in tokens(20), n in 1usize..=2) {
        let ab = rouge_n(&c, &r, n);
        let ba = rouge_n(&r, &c, n);
        for x in [ab.precision, ab.recall, ab.f1, rouge_l(&c, &r).f1] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        prop_assert!((ab.f1 - ba.f1).abs() < 1e-15);
    }

    #[test]
    fn self_overlap_is_perfect(x in tokens(20), n in 1usize..=3) {
        prop_assume!(x.len() >= n);
        prop_assert_eq!(rouge_n(&x, &x, n).f1, 1.0);
    }

    #[test]
    fn lcs_properties(a in tokens(25), b in tokens(25), t in "[a-e]") {
        let l = lcs_len(&a, &b);
        prop_assert_eq!(l, brute_lcs(&a, &b));
        prop_assert!(l <= a.len().min(b.len()));
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.push(t.clone());
        b2.push(t);
        prop_assert!(lcs_len(&a2, &b2) >= l);
    }

    #[test]
    fn cosine_positive_scale_invariance(
        v in prop::collection::vec(-10.0f64..10.0, 4),
        w in prop::collection::vec(-10.0f64..10.0, 4),
        alpha in 0.01f64..100.0,
        beta in 0.01f64..100.0,
    ) {
        let a = EmbeddingVector::new(v).unwrap();
        let b = EmbeddingVector::new(w).unwrap();
        prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
        let base = cosine_similarity(&a, &b).unwrap();
        let scaled = cosine_similarity(&a.scaled(alpha), &b.scaled(beta)).unwrap();
        prop_assert!((base - scaled).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&base));
    }
}
