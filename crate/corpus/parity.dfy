method parity(x: int) returns (r: int)
  ensures r == x - 2 * (x / 2)
  ensures 0 <= r && r < 2
{
  r := x % 2;
}
