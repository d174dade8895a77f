import fs from 'fs'

/**
 * Shortest round-trip decimal for a float64, always positional.
 * String(x) is already the shortest representation; this only unfolds
 * the exponent form ("1.2e-7") into plain digits, keeping the exact
 * same value.
 */
export function formatFloat(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`cannot format non-finite value ${x}`)
  }
  const s = String(x)
  const e = s.indexOf('e')
  if (e < 0) {
    return s
  }
  const sign = s[0] === '-' ? '-' : ''
  const mantissa = sign ? s.slice(1, e) : s.slice(0, e)
  const exp = parseInt(s.slice(e + 1), 10)
  const dot = mantissa.indexOf('.')
  const digits = dot < 0 ? mantissa : mantissa.slice(0, dot) + mantissa.slice(dot + 1)
  const point = (dot < 0 ? mantissa.length : dot) + exp
  if (point <= 0) {
    return sign + '0.' + '0'.repeat(-point) + digits
  }
  if (point >= digits.length) {
    return sign + digits + '0'.repeat(point - digits.length)
  }
  return sign + digits.slice(0, point) + '.' + digits.slice(point)
}

/** JSON object with sorted keys and ", " / ": " separators. */
export function headerJson(header: Record<string, unknown>): string {
  const parts = Object.keys(header)
    .sort()
    .map(k => `${JSON.stringify(k)}: ${JSON.stringify(header[k])}`)
  return `{${parts.join(', ')}}`
}

export interface DatasetCsv {
  values: Float64Array
  labels: Int32Array
  n: number
  classes: number
  kind: 'probabilities' | 'logits'
  extras: Record<string, unknown>
}

/**
 * Write a dataset CSV: one '# {json}' header line with n, K, kind plus
 * any extra metadata, then one row per sample with the label last.
 */
export function writeDatasetCsv(path: string, data: DatasetCsv): void {
  const { values, labels, n, classes: K, kind } = data
  if (values.length !== n * K) {
    throw new Error(`value buffer has ${values.length} entries, expected ${n}x${K}`)
  }
  if (labels.length !== n) {
    throw new Error(`${labels.length} labels for ${n} rows`)
  }
  const header: Record<string, unknown> = { ...data.extras, n, K, kind }
  const lines: string[] = [`# ${headerJson(header)}`]
  const fields = new Array<string>(K + 1)
  for (let i = 0; i < n; ++i) {
    for (let j = 0; j < K; ++j) {
      fields[j] = formatFloat(values[i * K + j])
    }
    fields[K] = String(labels[i])
    lines.push(fields.join(','))
  }
  fs.writeFileSync(path, lines.join('\n') + '\n')
}
