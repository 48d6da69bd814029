/**
 * Typed 8-bit RGB image buffers exchanged with the core toolkit.
 *
 * The layout mirrors the core's raster exactly: contiguous row-major
 * samples, three channels, one byte per sample. PNG is the only wire
 * format, so pixel values survive the round trip bit-for-bit.
 */

import { PNG } from "pngjs";

export interface RasterBuffer {
  readonly width: number;
  readonly height: number;
  readonly channels: 3;
  /** Row-major RGB samples; length is exactly width * height * 3. */
  readonly data: Uint8Array;
}

export class LayoutError extends Error {}

export function rasterBuffer(width: number, height: number, data: Uint8Array): RasterBuffer {
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new LayoutError(`image dimensions must be positive integers, got ${width}x${height}`);
  }
  if (!(data instanceof Uint8Array)) {
    throw new LayoutError("pixel data must be a Uint8Array");
  }
  if (data.length !== width * height * 3) {
    throw new LayoutError(
      `buffer length ${data.length} does not match ${width}x${height}x3 ` +
        `(${width * height * 3}); only contiguous 3-channel RGB is supported`,
    );
  }
  return { width, height, channels: 3, data };
}

export function decodePng(bytes: Uint8Array): RasterBuffer {
  const png = PNG.sync.read(Buffer.from(bytes));
  const rgb = new Uint8Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    rgb[i * 3] = png.data[i * 4];
    rgb[i * 3 + 1] = png.data[i * 4 + 1];
    rgb[i * 3 + 2] = png.data[i * 4 + 2];
  }
  return rasterBuffer(png.width, png.height, rgb);
}

export function encodePng(buf: RasterBuffer): Buffer {
  const raster = rasterBuffer(buf.width, buf.height, buf.data);
  const png = new PNG({ width: raster.width, height: raster.height });
  for (let i = 0; i < raster.width * raster.height; i++) {
    png.data[i * 4] = raster.data[i * 3];
    png.data[i * 4 + 1] = raster.data[i * 3 + 1];
    png.data[i * 4 + 2] = raster.data[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  return PNG.sync.write(png);
}

export function sameBytes(a: RasterBuffer, b: RasterBuffer): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  return Buffer.from(a.data).equals(Buffer.from(b.data));
}
