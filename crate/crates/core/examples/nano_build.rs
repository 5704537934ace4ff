//! Dialect-tagged acceptability data from web documents: region from the
//! URL, agreement with a language-id tag, then tag sampling.

use dialectkit::nano::{
    build_examples, combine_langid_region, extract_region_from_url, Document, NanoConfig, SamplerConfig,
};

pub fn run_example() -> dialectkit::Result<()> {
    for url in ["https://noticias.exemplo.com.br/a", "https://www.example.co.uk/", "https://example.io/"] {
        println!("{url} -> {:?}", extract_region_from_url(url));
    }
    let zh = "zh".parse()?;
    println!("zh text on a .tw site with langid zh-CN: {:?}", combine_langid_region("你好。", &"zh-CN".parse()?, Some("TW")).err());
    println!("plain zh langid on a .tw site: {:?}", combine_langid_region("你好。", &zh, Some("TW")).err());

    let doc = |url: &str, text: &str, tag: &str| Document {
        url: url.into(),
        text: text.into(),
        langid_tag: Some(tag.parse().unwrap()),
    };
    let docs = vec![
        doc("https://loja.exemplo.com.br/", "Comprei um celular novo. Peguei o ônibus cedo!", "pt-BR"),
        doc("https://jornal.exemplo.pt/", "Apanhei o autocarro. O comboio estava atrasado.", "pt-PT"),
        doc("https://news.example.de/", "Das Wetter ist schön. Wir gehen spazieren.", "de"),
        doc("https://blog.example.at/", "Heute gibt es Marillenknödel.", "de"),
    ];
    let config = NanoConfig {
        sampler: SamplerConfig { lambda: 1.0, seed: 3, ..SamplerConfig::default() },
        ..NanoConfig::default()
    };
    let build = build_examples(&docs, &config)?;
    for ex in &build.examples {
        println!("{} -> {}", ex.input, ex.target);
    }
    println!(
        "kept {} of {} sentences, positive fraction {:.2}",
        build.summary.kept, build.summary.sentences, build.summary.positive_fraction
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
