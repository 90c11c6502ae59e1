//! Forward passes checked against plain dense arithmetic written
//! independently of the tensor library.

mod common;

use candle_core::{DType, Device, Tensor};
use common::{flat, tensor};
use eventstory_model::fusion::ContextualizingModule;
use eventstory_model::layers::{padding_bias, Decoder, Linear};
use eventstory_model::params::ParamStore;
use eventstory_model::similarity::SimilarityHead;

type M = Vec<Vec<f64>>;

fn mat(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> M {
    (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect()
}

fn mul(a: &M, b: &M) -> M {
    mat(a.len(), b[0].len(), |i, j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
}

fn transpose(a: &M) -> M {
    mat(a[0].len(), a.len(), |i, j| a[j][i])
}

fn add(a: &M, b: &M) -> M {
    mat(a.len(), a[0].len(), |i, j| a[i][j] + b[i][j])
}

fn cols(a: &M, from: usize, n: usize) -> M {
    mat(a.len(), n, |i, j| a[i][from + j])
}

fn softmax_rows(a: &M) -> M {
    a.iter()
        .map(|r| {
            let mx = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = r.iter().map(|x| (x - mx).exp()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|x| x / s).collect()
        })
        .collect()
}

fn layer_norm(a: &M) -> M {
    a.iter()
        .map(|r| {
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            r.iter().map(|x| (x - mean) / (var + 1e-5).sqrt()).collect()
        })
        .collect()
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + ((2.0 / std::f64::consts::PI).sqrt() * (x + 0.044715 * x.powi(3))).tanh())
}

/// Multi-head attention: queries from `q_in`, keys and values from
/// `kv_in`, an optional causal mask, then the output projection.
fn attention(q_in: &M, kv_in: &M, w: [&M; 4], heads: usize, causal: bool) -> (M, Vec<M>) {
    let q = mul(q_in, w[0]);
    let k = mul(kv_in, w[1]);
    let v = mul(kv_in, w[2]);
    let dk = q[0].len() / heads;
    let mut concat = mat(q.len(), 0, |_, _| 0.0);
    let mut all = Vec::new();
    for h in 0..heads {
        let (qh, kh, vh) = (cols(&q, h * dk, dk), cols(&k, h * dk, dk), cols(&v, h * dk, dk));
        let mut s = mul(&qh, &transpose(&kh));
        for (i, row) in s.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x /= (dk as f64).sqrt();
                if causal && j > i {
                    *x = f64::NEG_INFINITY;
                }
            }
        }
        let p = softmax_rows(&s);
        let a = mul(&p, &vh);
        for (row, extra) in concat.iter_mut().zip(a) {
            row.extend(extra);
        }
        all.push(p);
    }
    (mul(&concat, w[3]), all)
}

fn to_tensor(a: &M) -> Tensor {
    let data: Vec<f64> = a.iter().flatten().copied().collect();
    tensor(&data, &[1, a.len(), a[0].len()])
}

fn set(store: &ParamStore, name: &str, a: &M) {
    let data: Vec<f64> = a.iter().flatten().copied().collect();
    store.set(name, &tensor(&data, &[a.len(), a[0].len()])).unwrap();
}

fn set_vec(store: &ParamStore, name: &str, v: &[f64]) {
    store.set(name, &tensor(v, &[v.len()])).unwrap();
}

fn close(got: &[f64], want: &M, tol: f64) {
    let want: Vec<f64> = want.iter().flatten().copied().collect();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= tol, "{g} vs {w}");
    }
}

fn fusion_module(store: &mut ParamStore, dim: usize) -> ContextualizingModule {
    ContextualizingModule::new(store, dim, 2, 0.1, false, 0.02).unwrap()
}

#[test]
fn two_head_cross_attention_matches_dense_oracle() {
    let mut store = ParamStore::new(42, DType::F64, Device::Cpu);
    let m = fusion_module(&mut store, 4);
    let wq = vec![
        vec![0.5, -0.2, 0.1, 0.0],
        vec![0.3, 0.8, -0.5, 0.2],
        vec![-0.1, 0.4, 0.6, -0.3],
        vec![0.2, 0.0, 0.3, 0.7],
    ];
    let wk = vec![
        vec![0.1, 0.6, -0.4, 0.2],
        vec![-0.7, 0.2, 0.3, 0.5],
        vec![0.4, -0.1, 0.2, 0.9],
        vec![0.0, 0.3, -0.6, 0.1],
    ];
    let wv = vec![
        vec![1.0, 0.0, 0.5, -0.5],
        vec![0.2, 0.3, 0.0, 0.4],
        vec![-0.3, 0.6, 0.1, 0.0],
        vec![0.5, -0.2, 0.7, 0.3],
    ];
    let wo = vec![
        vec![0.3, -0.1, 0.0, 0.2],
        vec![0.6, 0.4, -0.3, 0.1],
        vec![-0.2, 0.5, 0.8, 0.0],
        vec![0.1, 0.0, 0.2, -0.4],
    ];
    for (n, w) in [("q", &wq), ("k", &wk), ("v", &wv), ("o", &wo)] {
        set(&store, &format!("fusion.{n}.w"), w);
    }
    let fe = vec![vec![1.0, 0.5, -1.0, 2.0], vec![0.0, 1.5, 0.3, -0.7], vec![-1.2, 0.4, 0.9, 0.1]];
    let fc = vec![vec![0.6, -0.3, 1.1, 0.2], vec![-0.5, 0.8, 0.0, 1.4]];
    let bias = padding_bias(&[2], 2, DType::F64, &Device::Cpu).unwrap();
    let (fca, weights) = m.cross_attend(&to_tensor(&fe), &to_tensor(&fc), &bias).unwrap();
    let (want, want_w) = attention(&fe, &fc, [&wq, &wk, &wv, &wo], 2, false);
    assert_eq!(fca.dims(), &[1, 3, 4]);
    assert_eq!(weights.dims(), &[1, 2, 3, 2]);
    close(&flat(&fca), &want, 1e-12);
    let w = flat(&weights);
    close(&w[..6], &want_w[0], 1e-12);
    close(&w[6..], &want_w[1], 1e-12);
}

#[test]
fn single_context_token_gets_all_the_weight() {
    let mut store = ParamStore::new(3, DType::F64, Device::Cpu);
    let m = fusion_module(&mut store, 4);
    let fe = mat(5, 4, |i, j| (i as f64 - 2.0) * 0.3 + j as f64 * 0.1);
    let fc = vec![vec![0.4, -0.2, 0.9, 0.5]];
    let bias = padding_bias(&[1], 1, DType::F64, &Device::Cpu).unwrap();
    let (fca, weights) = m.cross_attend(&to_tensor(&fe), &to_tensor(&fc), &bias).unwrap();
    assert!(flat(&weights).iter().all(|w| *w == 1.0));
    // every event row receives the projected value of the one context row
    let wv = mat(4, 4, |i, j| flat(&store.get("fusion.v.w").unwrap())[i * 4 + j]);
    let wo = mat(4, 4, |i, j| flat(&store.get("fusion.o.w").unwrap())[i * 4 + j]);
    let row = mul(&mul(&fc, &wv), &wo);
    close(&flat(&fca), &mat(5, 4, |_, j| row[0][j]), 1e-12);
}

#[test]
fn equal_logits_give_uniform_weights() {
    let mut store = ParamStore::new(3, DType::F64, Device::Cpu);
    let m = fusion_module(&mut store, 4);
    set(&store, "fusion.q.w", &mat(4, 4, |_, _| 0.0));
    let fe = mat(3, 4, |i, j| (i * 4 + j) as f64 * 0.1);
    let fc = mat(7, 4, |i, j| ((i + j) % 3) as f64 - 1.0);
    let bias = padding_bias(&[7], 7, DType::F64, &Device::Cpu).unwrap();
    let (_, weights) = m.cross_attend(&to_tensor(&fe), &to_tensor(&fc), &bias).unwrap();
    for w in flat(&weights) {
        assert!((w - 1.0 / 7.0).abs() < 1e-15);
    }
}

/// Smooth, distinct, hand-specified values for a named weight.
fn pattern(rows: usize, cols: usize, salt: f64) -> M {
    mat(rows, cols, |i, j| ((i * cols + j) as f64 * 0.37 + salt).sin() * 0.5)
}

#[test]
fn one_layer_decoder_matches_dense_oracle() {
    let (vocab, dim, heads, hidden) = (5usize, 4usize, 2usize, 16usize);
    let mut store = ParamStore::new(42, DType::F64, Device::Cpu);
    let decoder = Decoder::new(&mut store, "decoder", dim, heads, 1, 8, 0.02).unwrap();
    let head = Linear::new(&mut store, "lm_head", dim, vocab, false, 0.02).unwrap();
    let embed = pattern(vocab, dim, 0.1);
    let pos = pattern(8, dim, 0.7);
    set(&store, "decoder.pos", &pos);
    let p = "decoder.layers.0";
    let mut salt = 1.0;
    let mut w = |store: &ParamStore, name: &str, r: usize, c: usize| {
        salt += 0.913;
        let m = pattern(r, c, salt);
        set(store, name, &m);
        m
    };
    let sa: Vec<M> = ["q", "k", "v", "o"].iter().map(|n| w(&store, &format!("{p}.self_attn.{n}.w"), dim, dim)).collect();
    let ca: Vec<M> = ["q", "k", "v", "o"].iter().map(|n| w(&store, &format!("{p}.cross_attn.{n}.w"), dim, dim)).collect();
    let up = w(&store, &format!("{p}.ffn.up.w"), dim, hidden);
    let down = w(&store, &format!("{p}.ffn.down.w"), hidden, dim);
    let out = w(&store, "lm_head.w", dim, vocab);
    let up_b: Vec<f64> = (0..hidden).map(|i| 0.05 * i as f64 - 0.3).collect();
    set_vec(&store, &format!("{p}.ffn.up.b"), &up_b);
    // attention biases stay at their zero init; the oracle omits them

    let tokens = [1usize, 4, 0, 3];
    let memory = pattern(3, dim, 2.2);
    let x0 = mat(tokens.len(), dim, |i, j| embed[tokens[i]][j] + pos[i][j]);
    let x = layer_norm(&x0);
    let (a, _) = attention(&x, &x, [&sa[0], &sa[1], &sa[2], &sa[3]], heads, true);
    let x = layer_norm(&add(&x, &a));
    let (c, _) = attention(&x, &memory, [&ca[0], &ca[1], &ca[2], &ca[3]], heads, false);
    let x = layer_norm(&add(&x, &c));
    let mut u = mul(&x, &up);
    for row in u.iter_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = gelu(*v + up_b[k]);
        }
    }
    let x = layer_norm(&add(&x, &mul(&u, &down)));
    let want = mul(&x, &out);

    let emb = to_tensor(&mat(tokens.len(), dim, |i, j| embed[tokens[i]][j]));
    let bias = padding_bias(&[3], 3, DType::F64, &Device::Cpu).unwrap();
    let hidden_states = decoder.forward(&emb, &to_tensor(&memory), &bias).unwrap();
    let logits = head.forward(&hidden_states).unwrap();
    assert_eq!(logits.dims(), &[1, 4, vocab]);
    close(&flat(&logits), &want, 1e-9);
}

#[test]
fn similarity_head_matches_bilinear_oracle() {
    let mut store = ParamStore::new(42, DType::F64, Device::Cpu);
    let head = SimilarityHead::new(&mut store, 2, 0.02).unwrap();
    let w = vec![vec![0.5, -1.0], vec![2.0, 0.25]];
    set(&store, "similarity.w", &w);
    let h = vec![vec![1.0, 0.0], vec![0.5, -1.0], vec![-0.3, 0.8]];
    let data: Vec<f64> = h.iter().flatten().copied().collect();
    let got = flat(&head.predict(&tensor(&data, &[3, 2])).unwrap());
    let u = |i: usize, j: usize| (0..2).map(|a| (0..2).map(|b| h[i][a] * w[a][b] * h[j][b]).sum::<f64>()).sum::<f64>();
    let want = mat(3, 3, |i, j| 1.0 / (1.0 + (-(u(i, j) + u(j, i))).exp()));
    // by hand: u00 = w00 = 0.5, so the corner is sigmoid(1)
    assert!((want[0][0] - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
    close(&got, &want, 1e-12);
}

#[test]
fn zero_bilinear_form_predicts_one_half() {
    let mut store = ParamStore::new(42, DType::F32, Device::Cpu);
    let head = SimilarityHead::new(&mut store, 3, 0.02).unwrap();
    store.set("similarity.w", &Tensor::zeros((3, 3), DType::F32, &Device::Cpu).unwrap()).unwrap();
    let h = Tensor::new(&[[1f32, 2.0, 3.0], [-1.0, 0.5, 0.0], [4.0, 4.0, -2.0], [0.1, 0.2, 0.3]], &Device::Cpu).unwrap();
    assert!(flat(&head.predict(&h).unwrap()).iter().all(|v| *v == 0.5));
}
