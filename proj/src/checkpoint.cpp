#include "loadcast/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include "loadcast/csvio.hpp"
#include "loadcast/errors.hpp"

namespace loadcast {

namespace {
constexpr const char* kHeader = "loadcast-checkpoint,1";
}

void save_checkpoint(const std::string& path, const DeepModel& model) {
    std::ofstream out(path);
    if (!out.is_open()) throw DataError("cannot create checkpoint: " + path);
    out << kHeader << '\n';
    out << "family," << family_name(model.preset().family) << '\n';
    out << "size_class," << size_class_name(model.preset().size_class) << '\n';
    char buf[32];
    for (const auto& p : model.params().params) {
        const nn::Matrix& m = p.tensor.value();
        out << "param," << p.name << ',' << m.rows << ',' << m.cols;
        for (double v : m.data) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

std::unique_ptr<DeepModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw DataError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw DataError(path + ": not a loadcast checkpoint (bad header)");
    }

    auto read_field = [&](const std::string& key) {
        if (!std::getline(in, line)) throw DataError(path + ": truncated checkpoint");
        auto fields = split_csv_line(line);
        if (fields.size() != 2 || fields[0] != key) {
            throw DataError(path + ": expected '" + key + "' line");
        }
        return fields[1];
    };
    ModelFamily family = family_from_name(read_field("family"));
    SizeClass size_class = size_class_from_name(read_field("size_class"));

    auto model = make_deep_model(preset_for(family, size_class), 0);
    std::size_t loaded = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 4 || fields[0] != "param") {
            throw DataError(path + ": malformed parameter row");
        }
        const std::string& name = fields[1];
        nn::Tensor* target = nullptr;
        for (auto& p : model->params().params) {
            if (p.name == name) {
                target = &p.tensor;
                break;
            }
        }
        if (target == nullptr) throw DataError(path + ": unknown parameter '" + name + "'");
        std::size_t rows = static_cast<std::size_t>(parse_number(fields[2], path));
        std::size_t cols = static_cast<std::size_t>(parse_number(fields[3], path));
        nn::Matrix& m = target->value();
        if (rows != m.rows || cols != m.cols || fields.size() != 4 + m.size()) {
            throw DataError(path + ": parameter '" + name + "' has wrong shape");
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            m.data[i] = parse_number(fields[4 + i], path);
        }
        ++loaded;
    }
    if (loaded != model->params().params.size()) {
        throw DataError(path + ": checkpoint holds " + std::to_string(loaded) + " of " +
                        std::to_string(model->params().params.size()) + " parameters");
    }
    return model;
}

}  // namespace loadcast
