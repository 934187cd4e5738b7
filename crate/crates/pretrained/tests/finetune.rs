use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use infodemic::modeling::{train, Checkpoint, Registry, TrainConfig};
use infodemic::synthetic::{self, SyntheticConfig};
use infodemic_pretrained::{Hub, PretrainedFactory};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn registry(cache: &Path, endpoint: &str, offline: bool) -> Registry {
    let mut r = Registry::default();
    r.register(Box::new(PretrainedFactory::new(Hub {
        cache_dir: cache.to_path_buf(),
        endpoint: endpoint.to_string(),
        offline,
    })));
    r
}

fn config(seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        epochs: 2,
        batch_size: 8,
        max_seq_len: 16,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    }
}

fn data() -> (infodemic::Dataset, infodemic::Dataset, infodemic::Dataset) {
    synthetic::generate(&SyntheticConfig {
        train: 32,
        dev: 12,
        test: 10,
        seed: 3,
        ..Default::default()
    })
}

#[test]
fn fine_tunes_saves_and_reloads_bit_identically() {
    let cache = tempfile::tempdir().unwrap();
    let reg = registry(cache.path(), "http://127.0.0.1:9", true);
    let id = fixture("tiny-bert").to_string_lossy().into_owned();
    let (tr, dev, test) = data();

    let before = reg.create(&id, 0).unwrap();
    let untouched = before.encode(&[before.tokenize("the virus is a hoax", 16)]).unwrap();
    let ckpt = train(before, &config(5), &tr, &dev).unwrap();
    let after = ckpt.encoder.encode(&[ckpt.encoder.tokenize("the virus is a hoax", 16)]).unwrap();
    assert_ne!(untouched, after, "encoder weights were not updated");
    assert_eq!(ckpt.meta.backend, id);
    assert_eq!(ckpt.meta.dim, 32);

    let scores = ckpt.predict(&test).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ckpt.save(dir.path()).unwrap();
    assert!(dir.path().join("encoder/model.safetensors").is_file());
    assert!(dir.path().join("encoder/vocab.txt").is_file());
    let loaded = Checkpoint::load(dir.path(), &reg).unwrap();
    let again = loaded.predict(&test).unwrap();
    for (a, b) in scores.values().iter().zip(again.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn same_seed_gives_same_selection_metric() {
    let cache = tempfile::tempdir().unwrap();
    let reg = registry(cache.path(), "http://127.0.0.1:9", true);
    let id = fixture("tiny-roberta").to_string_lossy().into_owned();
    let (tr, dev, _) = data();
    let run = || train(reg.create(&id, 0).unwrap(), &config(11), &tr, &dev).unwrap().meta;
    let (a, b) = (run(), run());
    assert_eq!(a.metric.to_bits(), b.metric.to_bits());
    let losses = |m: &infodemic::modeling::CheckpointMeta| m.history.iter().map(|h| h.train_loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(losses(&a), losses(&b));
}

/// Serves files from `root` under `/{repo}/resolve/main/{file}`; anything
/// else is a 404.
fn serve(repo: &'static str, root: PathBuf) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
            }
            let path = request.split_whitespace().nth(1).unwrap_or("").to_string();
            let file = path
                .rsplit_once("/resolve/main/")
                .filter(|(r, _)| r.trim_start_matches('/') == repo)
                .map(|(_, f)| root.join(f));
            match file.and_then(|f| std::fs::read(f).ok()) {
                Some(body) => {
                    let head = format!(
                        "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                        body.len()
                    );
                    let _ = stream.write_all(head.as_bytes());
                    let _ = stream.write_all(&body);
                }
                None => {
                    let _ = stream.write_all(b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
                }
            }
        }
    });
    format!("http://{addr}")
}

#[test]
fn downloads_into_cache_then_works_offline() {
    let endpoint = serve("someone/tiny-bert", fixture("tiny-bert"));
    let cache = tempfile::tempdir().unwrap();
    let online = registry(cache.path(), &endpoint, false);
    let enc = online.create("someone/tiny-bert", 0).unwrap();
    assert_eq!(enc.dim(), 32);
    let cached = cache.path().join("someone--tiny-bert");
    for f in ["config.json", "model.safetensors", "vocab.txt", "tokenizer_config.json"] {
        assert!(cached.join(f).is_file(), "{f} not cached");
    }
    assert!(!cached.join("merges.txt").exists());

    let offline = registry(cache.path(), "http://127.0.0.1:9", true);
    let again = offline.create("someone/tiny-bert", 0).unwrap();
    let t = enc.tokenize("cure found", 16);
    assert_eq!(enc.encode(&[t.clone()]).unwrap(), again.encode(&[t]).unwrap());

    let err = online.create("someone/absent", 0).err().unwrap().to_string();
    assert!(err.contains("no config.json"), "{err}");
}

#[test]
fn plain_ids_stay_unknown() {
    let cache = tempfile::tempdir().unwrap();
    let reg = registry(cache.path(), "http://127.0.0.1:9", true);
    assert!(matches!(reg.create("not-a-model", 0), Err(infodemic::Error::UnknownBackend(_))));
    assert!(reg.create("toy", 0).is_ok());
}
