#pragma once

#include <string>
#include <vector>

namespace swarm_pe {

// All emitted artifacts format floats with 9 significant digits so re-runs
// are byte-identical.
std::string fmt_g9(double value);

// Parse of the 9-digit rendering; keeps JSON output stable across runs.
double round_g9(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Minimal CSV emitter: caller provides pre-formatted fields.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::vector<std::string> fields);
  const std::string& text() const { return text_; }
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

// Minimal SVG builder with fixed formatting.
class SvgWriter {
 public:
  // world coordinates [x0,x1]x[y0,y1] mapped into a width x height canvas,
  // y flipped so world "up" renders up
  SvgWriter(double width, double height, double x0, double y0, double x1,
            double y1);

  void rect(double x, double y, double w, double h, const std::string& style);
  void line(double x1, double y1, double x2, double y2,
            const std::string& style);
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& style);
  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& style);
  void circle(double cx, double cy, double r, const std::string& style);
  void text(double x, double y, const std::string& content,
            const std::string& style);

  std::string finish() const;
  void save(const std::string& path) const;

 private:
  double tx(double x) const;
  double ty(double y) const;
  double scale_;
  double width_, height_, x0_, y0_, x1_, y1_;
  std::string body_;
};

}  // namespace swarm_pe
