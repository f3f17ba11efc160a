#include "miptrace/phantom_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace miptrace {
namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw std::runtime_error("phantom spec line " + std::to_string(line_no) + ": " + what);
}

std::string trim(const std::string& s) {
    const size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& token, int line_no) {
    std::istringstream in(token);
    T value;
    in >> value;
    if (in.fail() || !in.eof()) fail(line_no, "cannot parse number '" + token + "'");
    return value;
}

}  // namespace

PhantomSpec parse_phantom_spec(const std::string& text) {
    PhantomSpec spec;
    bool have_nx = false, have_ny = false, have_nz = false;
    std::vector<std::string> seen_scalars;

    const auto mark_scalar = [&seen_scalars](const std::string& key, int line_no) {
        for (const std::string& s : seen_scalars)
            if (s == key) fail(line_no, "duplicate key '" + key + "'");
        seen_scalars.push_back(key);
    };

    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(line_no, "expected 'key = value'");

        if (key == "sphere") {
            std::istringstream fields(value);
            std::string kind;
            std::string cx, cy, cz, radius, intensity, extra;
            fields >> kind >> cx >> cy >> cz >> radius >> intensity;
            if (fields.fail() || (fields >> extra))
                fail(line_no, "sphere needs 6 fields: kind cx cy cz radius intensity");
            SphereSpec sphere;
            if (kind == "organ")
                sphere.kind = SphereKind::Organ;
            else if (kind == "tumor")
                sphere.kind = SphereKind::Tumor;
            else
                fail(line_no, "sphere kind must be organ or tumor, got '" + kind + "'");
            sphere.cx = parse_number<double>(cx, line_no);
            sphere.cy = parse_number<double>(cy, line_no);
            sphere.cz = parse_number<double>(cz, line_no);
            sphere.radius = parse_number<double>(radius, line_no);
            sphere.intensity = parse_number<float>(intensity, line_no);
            spec.spheres.push_back(sphere);
        } else if (key == "nx") {
            mark_scalar(key, line_no);
            spec.nx = parse_number<int>(value, line_no);
            have_nx = true;
        } else if (key == "ny") {
            mark_scalar(key, line_no);
            spec.ny = parse_number<int>(value, line_no);
            have_ny = true;
        } else if (key == "nz") {
            mark_scalar(key, line_no);
            spec.nz = parse_number<int>(value, line_no);
            have_nz = true;
        } else if (key == "spacing") {
            mark_scalar(key, line_no);
            std::istringstream fields(value);
            std::string sx, sy, sz, extra;
            fields >> sx >> sy >> sz;
            if (fields.fail() || (fields >> extra)) fail(line_no, "spacing needs 3 numbers");
            spec.spacing.sx = parse_number<double>(sx, line_no);
            spec.spacing.sy = parse_number<double>(sy, line_no);
            spec.spacing.sz = parse_number<double>(sz, line_no);
        } else if (key == "background") {
            mark_scalar(key, line_no);
            spec.background_intensity = parse_number<float>(value, line_no);
        } else if (key == "noise_sigma") {
            mark_scalar(key, line_no);
            spec.noise_sigma = parse_number<double>(value, line_no);
        } else if (key == "seed") {
            mark_scalar(key, line_no);
            spec.seed = parse_number<uint64_t>(value, line_no);
        } else {
            fail(line_no, "unknown key '" + key + "'");
        }
    }

    if (!have_nx || !have_ny || !have_nz)
        throw std::runtime_error("phantom spec: nx, ny, nz are required");
    return spec;
}

PhantomSpec read_phantom_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("phantom spec: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_phantom_spec(buffer.str());
}

}  // namespace miptrace
