#include "toxic/classifiers.hpp"

namespace toxic {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::nb: return "nb";
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
  }
  return "?";
}

std::string_view to_string(EmbeddingSource source) {
  switch (source) {
    case EmbeddingSource::random: return "random";
    case EmbeddingSource::glove: return "glove";
    case EmbeddingSource::fasttext_vec: return "fasttext";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "nb") return ModelKind::nb;
  if (text == "cnn") return ModelKind::cnn;
  if (text == "lstm") return ModelKind::lstm;
  throw UsageError("unknown model kind '" + std::string(text) + "' (expected nb, cnn or lstm)");
}

EmbeddingSource parse_embedding_source(std::string_view text) {
  if (text == "random") return EmbeddingSource::random;
  if (text == "glove") return EmbeddingSource::glove;
  if (text == "fasttext" || text == "fasttext_vec") return EmbeddingSource::fasttext_vec;
  throw UsageError("unknown embedding source '" + std::string(text) + "' (expected glove, fasttext or random)");
}

std::vector<ParamShape> parameter_layout(const ModelConfig& cfg) {
  const auto V = static_cast<Eigen::Index>(cfg.vocab_size);
  const auto d = static_cast<Eigen::Index>(cfg.embedding_dim);
  const auto L = static_cast<Eigen::Index>(kNumLabels);
  std::vector<ParamShape> out{{"embedding", V, d}};
  if (cfg.kind == ModelKind::cnn) {
    const auto F = static_cast<Eigen::Index>(cfg.filters);
    const auto U = static_cast<Eigen::Index>(cfg.dense_units);
    const auto k = static_cast<Eigen::Index>(cfg.kernel);
    out.push_back({"conv.kernels", k * d, F});
    out.push_back({"conv.bias", 1, F});
    out.push_back({"hidden.weight", F, U});
    out.push_back({"hidden.bias", 1, U});
    out.push_back({"output.weight", U, L});
  } else if (cfg.kind == ModelKind::lstm) {
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    out.push_back({"lstm.W", d, 4 * H});
    out.push_back({"lstm.U", H, 4 * H});
    out.push_back({"lstm.b", 1, 4 * H});
    out.push_back({"output.weight", H, L});
  } else {
    throw ConfigError("Naive Bayes has no neural parameter layout");
  }
  out.push_back({"output.bias", 1, L});
  return out;
}

}  // namespace toxic
