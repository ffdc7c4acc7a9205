#pragma once

#include "robin/baselines.hpp"
#include "robin/checkpoint.hpp"
#include "robin/classifier.hpp"
#include "robin/config.hpp"
#include "robin/corpus.hpp"
#include "robin/errors.hpp"
#include "robin/example.hpp"
#include "robin/features.hpp"
#include "robin/interpreter.hpp"
#include "robin/lexer.hpp"
#include "robin/metrics.hpp"
#include "robin/nn.hpp"
#include "robin/pipeline.hpp"
#include "robin/rng.hpp"
#include "robin/transforms.hpp"
#include "robin/version.hpp"
