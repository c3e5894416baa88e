#include "cxc/json_io.hpp"

#include "cxc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cxc {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    std::string s(buf);
    // keep the token a JSON float so readers see the same type on every run
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

namespace {

void emit(const Json& j, int indent, int depth, std::string& out) {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += Json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                emit(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : j)
                if (e.is_structured()) scalars = false;
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += scalars ? ", " : ",";
                first = false;
                if (!scalars) newline(depth + 1);
                emit(e, indent, depth + 1, out);
            }
            if (!scalars) newline(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float: {
            double v = j.get<double>();
            if (std::isfinite(v))
                out += format_real(v);
            else
                out += '"' + format_real(v) + '"';
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_stable(const Json& j, int indent) {
    std::string out;
    emit(j, indent, 0, out);
    if (indent >= 0) out += '\n';
    return out;
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Validation, origin + ": invalid JSON: " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

}  // namespace cxc
