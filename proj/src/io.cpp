#include "swarm_pe/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "swarm_pe/common.hpp"

namespace swarm_pe {

std::string fmt_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

double round_g9(double value) {
  return std::strtod(fmt_g9(value).c_str(), nullptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("write failure: " + path);
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvWriter::row(std::vector<std::string> fields) {
  if (fields.size() != columns_)
    throw ShapeError("CsvWriter: row width does not match header");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
}

void CsvWriter::save(const std::string& path) const {
  write_text_file(path, text_);
}

SvgWriter::SvgWriter(double width, double height, double x0, double y0,
                     double x1, double y1)
    : width_(width), height_(height), x0_(x0), y0_(y0), x1_(x1), y1_(y1) {
  scale_ = width_ / (x1_ - x0_);
  body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           fmt_g9(width_) + "\" height=\"" + fmt_g9(height_) +
           "\" viewBox=\"0 0 " + fmt_g9(width_) + " " + fmt_g9(height_) +
           "\">\n";
}

double SvgWriter::tx(double x) const { return (x - x0_) * scale_; }
double SvgWriter::ty(double y) const { return height_ - (y - y0_) * scale_; }

void SvgWriter::rect(double x, double y, double w, double h,
                     const std::string& style) {
  body_ += "<rect x=\"" + fmt_g9(tx(x)) + "\" y=\"" + fmt_g9(ty(y + h)) +
           "\" width=\"" + fmt_g9(w * scale_) + "\" height=\"" +
           fmt_g9(h * scale_) + "\" style=\"" + style + "\"/>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2,
                     const std::string& style) {
  body_ += "<line x1=\"" + fmt_g9(tx(x1)) + "\" y1=\"" + fmt_g9(ty(y1)) +
           "\" x2=\"" + fmt_g9(tx(x2)) + "\" y2=\"" + fmt_g9(ty(y2)) +
           "\" style=\"" + style + "\"/>\n";
}

void SvgWriter::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& style) {
  body_ += "<polyline points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += fmt_g9(tx(pts[i].first)) + "," + fmt_g9(ty(pts[i].second));
  }
  body_ += "\" style=\"" + style + "\"/>\n";
}

void SvgWriter::polygon(const std::vector<std::pair<double, double>>& pts,
                        const std::string& style) {
  body_ += "<polygon points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += fmt_g9(tx(pts[i].first)) + "," + fmt_g9(ty(pts[i].second));
  }
  body_ += "\" style=\"" + style + "\"/>\n";
}

void SvgWriter::circle(double cx, double cy, double r,
                       const std::string& style) {
  body_ += "<circle cx=\"" + fmt_g9(tx(cx)) + "\" cy=\"" + fmt_g9(ty(cy)) +
           "\" r=\"" + fmt_g9(r * scale_) + "\" style=\"" + style + "\"/>\n";
}

void SvgWriter::text(double x, double y, const std::string& content,
                     const std::string& style) {
  body_ += "<text x=\"" + fmt_g9(tx(x)) + "\" y=\"" + fmt_g9(ty(y)) +
           "\" style=\"" + style + "\">" + content + "</text>\n";
}

std::string SvgWriter::finish() const { return body_ + "</svg>\n"; }

void SvgWriter::save(const std::string& path) const {
  write_text_file(path, finish());
}

}  // namespace swarm_pe
