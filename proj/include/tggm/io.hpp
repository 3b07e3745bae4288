#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tggm/graph.hpp"

namespace tggm {

// Edge list with a "p=<count>" header line; vertices are 1-based on disk.
void write_graph(const std::string& path, const DecomposableGraph& g);
DecomposableGraph read_graph(const std::string& path);

// Whitespace-separated values under a "rows cols" header.
void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_dense_matrix(const std::string& path);

// Comma-separated values with a header row; colnames empty means v1..vp.
void write_csv(const std::string& path, const Eigen::MatrixXd& m,
               const std::vector<std::string>& colnames = {});

// Pairwise probabilities as "j,k,prob" rows (1-based, j < k) under a header.
void write_edge_probabilities(const std::string& path, const Eigen::MatrixXd& probs);
Eigen::MatrixXd read_edge_probabilities(const std::string& path, int p);

}  // namespace tggm
