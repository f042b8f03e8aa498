#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/textio.hpp"
#include "smokegram/version.hpp"

namespace smokegram {
namespace {

constexpr const char* kGateNames[4] = {"i", "f", "g", "o"};

void emit_matrix(std::ostringstream& out, const std::string& name, const Matrix& m) {
    out << "matrix " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out << ' ';
            }
            out << textio::format_double(m(r, c));
        }
        out << '\n';
    }
}

void emit_meta(std::ostringstream& out, const PipelineMeta& meta) {
    out << "feature_order " << meta.feature_order << "\n";
    out << "sample_rate_hz " << textio::format_double(meta.sample_rate_hz) << "\n";
    out << "window " << meta.window << "\n";
    out << "stride " << meta.stride << "\n";
    out << "normalize " << (meta.normalize ? 1 : 0) << "\n";
    out << "leak_mode " << to_string(meta.leak_mode) << "\n";
    out << "balance_factor " << meta.balance_factor << "\n";
    out << "ratios " << textio::format_double(meta.ratios[0]) << " "
        << textio::format_double(meta.ratios[1]) << " "
        << textio::format_double(meta.ratios[2]) << "\n";
    out << "split_seed " << meta.split_seed << "\n";
}

class Reader {
public:
    explicit Reader(std::vector<std::string> lines) : lines_(std::move(lines)) {}

    bool done() const { return pos_ >= lines_.size(); }
    const std::string& peek() const { return lines_[pos_]; }
    std::string next() {
        if (done()) {
            throw ModelTruncatedError("model file: unexpected end of file");
        }
        return lines_[pos_++];
    }

    // "key value..." -> value..., enforcing the expected key.
    std::string field(const std::string& key) {
        const std::string line = next();
        if (line.rfind(key + " ", 0) != 0) {
            throw ParseError("model file: expected '" + key + " ...', got '" + line + "'");
        }
        return line.substr(key.size() + 1);
    }

    Matrix matrix(const std::string& expected_name) {
        const std::string header = field("matrix");
        const auto head = textio::split(header, ' ');
        if (head.size() != 3) {
            throw ParseError("model file: bad matrix header for '" + expected_name + "'");
        }
        if (head[0] != expected_name) {
            throw ParseError("model file: expected matrix '" + expected_name +
                             "', found '" + std::string(head[0]) + "'");
        }
        const auto rows = static_cast<std::size_t>(
            textio::parse_int(head[1], "matrix rows"));
        const auto cols = static_cast<std::size_t>(
            textio::parse_int(head[2], "matrix cols"));
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::string line = next();
            const auto vals = textio::split(line, ' ');
            if (vals.size() != cols) {
                throw ParseError("model file: matrix '" + expected_name + "' row " +
                                 std::to_string(r) + " has " +
                                 std::to_string(vals.size()) + " values, want " +
                                 std::to_string(cols));
            }
            for (std::size_t c = 0; c < cols; ++c) {
                m(r, c) = textio::parse_double(vals[c], "matrix '" + expected_name + "'");
            }
        }
        if (!m.all_finite()) {
            throw NumericError("model file: non-finite values in matrix '" +
                               expected_name + "'");
        }
        return m;
    }

private:
    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
};

PipelineMeta read_meta(Reader& r) {
    PipelineMeta meta;
    meta.feature_order = r.field("feature_order");
    meta.sample_rate_hz = textio::parse_double(r.field("sample_rate_hz"), "sample_rate_hz");
    meta.window = static_cast<std::size_t>(textio::parse_int(r.field("window"), "window"));
    meta.stride = static_cast<std::size_t>(textio::parse_int(r.field("stride"), "stride"));
    meta.normalize = textio::parse_int(r.field("normalize"), "normalize") != 0;
    meta.leak_mode = leak_mode_from_string(r.field("leak_mode"));
    meta.balance_factor = static_cast<std::size_t>(
        textio::parse_int(r.field("balance_factor"), "balance_factor"));
    const std::string ratios_line = r.field("ratios");
    const auto ratios = textio::split(ratios_line, ' ');
    if (ratios.size() != 3) {
        throw ParseError("model file: ratios needs 3 values");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        meta.ratios[i] = textio::parse_double(ratios[i], "ratios");
    }
    meta.split_seed = textio::parse_uint64(r.field("split_seed"), "split_seed");
    return meta;
}

std::string serialize(const Model& model) {
    std::ostringstream out;
    out << "smokegram-model v" << kModelFormatVersion << "\n";
    if (const auto* mlp = std::get_if<MlpModel>(&model)) {
        out << "family mlp\n";
        out << "loss " << to_string(mlp->loss) << "\n";
        out << "seed " << mlp->seed << "\n";
        emit_meta(out, mlp->meta);
        out << "arch";
        for (std::size_t s : mlp->layer_sizes) {
            out << ' ' << s;
        }
        out << '\n';
        for (std::size_t i = 0; i < mlp->weights.size(); ++i) {
            const std::string base = "layer" + std::to_string(i);
            emit_matrix(out, base + ".weight", mlp->weights[i]);
            emit_matrix(out, base + ".bias", mlp->biases[i]);
        }
    } else {
        const auto& lstm = std::get<LstmModel>(model);
        out << "family lstm\n";
        out << "loss " << to_string(lstm.loss) << "\n";
        out << "seed " << lstm.seed << "\n";
        emit_meta(out, lstm.meta);
        out << "mode " << to_string(lstm.mode) << "\n";
        out << "units " << lstm.units << "\n";
        for (std::size_t c = 0; c < lstm.cells.size(); ++c) {
            for (std::size_t g = 0; g < 4; ++g) {
                const std::string base =
                    "cell" + std::to_string(c) + "." + kGateNames[g];
                emit_matrix(out, base + ".wx", lstm.cells[c].wx[g]);
                emit_matrix(out, base + ".wh", lstm.cells[c].wh[g]);
                emit_matrix(out, base + ".b", lstm.cells[c].b[g]);
            }
        }
        if (lstm.mode == LstmMode::wide) {
            emit_matrix(out, "readout.w", lstm.readout_w);
            emit_matrix(out, "readout.b", lstm.readout_b);
        }
    }
    std::string body = out.str();
    body += "checksum " + textio::to_hex(textio::fnv1a(body)) + "\n";
    return body;
}

} // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    out << serialize(model);
    if (!out) {
        throw Error("write failed for '" + path + "'");
    }
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    // Verify the trailing checksum before interpreting anything else.
    const auto checksum_pos = text.rfind("checksum ");
    if (checksum_pos == std::string::npos || text.empty() || text.back() != '\n') {
        throw ModelTruncatedError(path + ": missing checksum line");
    }
    const std::string body = text.substr(0, checksum_pos);
    const std::string checksum_line =
        text.substr(checksum_pos, text.size() - checksum_pos - 1);
    const std::string want = "checksum " + textio::to_hex(textio::fnv1a(body));
    if (checksum_line != want) {
        throw ModelChecksumError(path + ": checksum mismatch");
    }

    std::vector<std::string> lines;
    std::istringstream stream(body);
    std::string line;
    while (std::getline(stream, line)) {
        lines.push_back(line);
    }
    Reader r(std::move(lines));

    const std::string header = r.next();
    if (header.rfind("smokegram-model v", 0) != 0) {
        throw ParseError(path + ": not a model file");
    }
    const auto version = textio::parse_int(header.substr(17), "model version");
    if (version != kModelFormatVersion) {
        throw ModelVersionError(path + ": unsupported model format version " +
                                std::to_string(version));
    }

    const std::string family = r.field("family");
    const LossKind loss = loss_from_string(r.field("loss"));
    const auto seed = textio::parse_uint64(r.field("seed"), "seed");
    PipelineMeta meta = read_meta(r);

    if (family == "mlp") {
        MlpModel m;
        m.loss = loss;
        m.seed = seed;
        m.meta = std::move(meta);
        const std::string arch_line = r.field("arch");
        const auto arch = textio::split(arch_line, ' ');
        for (const auto& tok : arch) {
            m.layer_sizes.push_back(
                static_cast<std::size_t>(textio::parse_int(tok, "arch")));
        }
        if (m.layer_sizes.size() < 2 || m.layer_sizes.front() != kInputWidth ||
            m.layer_sizes.back() != kOutputWidth) {
            throw ParseError(path + ": bad mlp architecture");
        }
        for (std::size_t i = 0; i + 1 < m.layer_sizes.size(); ++i) {
            const std::string base = "layer" + std::to_string(i);
            m.weights.push_back(r.matrix(base + ".weight"));
            m.biases.push_back(r.matrix(base + ".bias"));
            if (m.weights.back().rows() != m.layer_sizes[i] ||
                m.weights.back().cols() != m.layer_sizes[i + 1]) {
                throw ParseError(path + ": weight shape does not match arch");
            }
        }
        return m;
    }
    if (family == "lstm") {
        LstmModel m;
        m.loss = loss;
        m.seed = seed;
        m.meta = std::move(meta);
        m.mode = lstm_mode_from_string(r.field("mode"));
        m.units = static_cast<std::size_t>(textio::parse_int(r.field("units"), "units"));
        const std::size_t n_cells = m.mode == LstmMode::stacked ? m.units : 1;
        for (std::size_t c = 0; c < n_cells; ++c) {
            LstmCellParams cell;
            for (std::size_t g = 0; g < 4; ++g) {
                const std::string base =
                    "cell" + std::to_string(c) + "." + kGateNames[g];
                cell.wx[g] = r.matrix(base + ".wx");
                cell.wh[g] = r.matrix(base + ".wh");
                cell.b[g] = r.matrix(base + ".b");
            }
            m.cells.push_back(std::move(cell));
        }
        if (m.mode == LstmMode::wide) {
            m.readout_w = r.matrix("readout.w");
            m.readout_b = r.matrix("readout.b");
        }
        return m;
    }
    throw ParseError(path + ": unknown model family '" + family + "'");
}

MlpModel load_mlp(const std::string& path) {
    Model m = load_model(path);
    if (auto* mlp = std::get_if<MlpModel>(&m)) {
        return std::move(*mlp);
    }
    throw ModelFamilyError(path + ": expected an mlp model, found lstm");
}

LstmModel load_lstm(const std::string& path) {
    Model m = load_model(path);
    if (auto* lstm = std::get_if<LstmModel>(&m)) {
        return std::move(*lstm);
    }
    throw ModelFamilyError(path + ": expected an lstm model, found mlp");
}

Matrix model_forward(const Model& model, const Matrix& batch) {
    if (const auto* mlp = std::get_if<MlpModel>(&model)) {
        return mlp_forward(*mlp, batch);
    }
    return lstm_forward(std::get<LstmModel>(model), batch);
}

const PipelineMeta& model_meta(const Model& model) {
    if (const auto* mlp = std::get_if<MlpModel>(&model)) {
        return mlp->meta;
    }
    return std::get<LstmModel>(model).meta;
}

std::string model_family(const Model& model) {
    return std::holds_alternative<MlpModel>(model) ? "mlp" : "lstm";
}

} // namespace smokegram
