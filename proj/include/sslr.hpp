/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sslr/activation.hpp"
#include "sslr/bitops.hpp"
#include "sslr/bits.hpp"
#include "sslr/cli.hpp"
#include "sslr/composenet.hpp"
#include "sslr/engine.hpp"
#include "sslr/error.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/io.hpp"
#include "sslr/local.hpp"
#include "sslr/prg.hpp"
#include "sslr/randomness.hpp"
#include "sslr/ring.hpp"
#include "sslr/role.hpp"
#include "sslr/sharing.hpp"
#include "sslr/thread_pool.hpp"
#include "sslr/training.hpp"
#include "sslr/transport.hpp"
